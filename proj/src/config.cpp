#include "eqbase/config.hpp"

#include <cstdio>
#include <set>

#include <json.hpp>

namespace eqbase {

namespace {

using ojson = nlohmann::ordered_json;

void check_keys(const ojson& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where.empty() ? "config must be an object" : where + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
        if (!ok.count(key)) throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
}

template <typename T>
void read(const ojson& j, const char* key, const std::string& where, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
    }
}

void read_optional(const ojson& j, const char* key, const std::string& where, std::optional<double>& out) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
        out.reset();
        return;
    }
    if (!j.at(key).is_number()) throw ConfigError("config key '" + where + "." + key + "' must be a number or null");
    out = j.at(key).get<double>();
}

ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::string kernel_name(OmoriKernel k) { return k == OmoriKernel::Literal ? "literal" : "normalized"; }

OmoriKernel parse_kernel(const std::string& s) {
    if (s == "literal") return OmoriKernel::Literal;
    if (s == "normalized") return OmoriKernel::Normalized;
    throw ConfigError("config key 'etas.kernel' must be 'literal' or 'normalized'");
}

void parse_rules(const ojson& j, const std::string& where, std::vector<DecisionRule>& rules) {
    if (!j.contains("rules")) return;
    if (!j.at("rules").is_array()) throw ConfigError("config key '" + where + ".rules' must be an array");
    rules.clear();
    for (const auto& r : j.at("rules")) {
        if (!r.is_string()) throw ConfigError("config key '" + where + ".rules' must hold strings");
        try {
            rules.push_back(DecisionRule::parse(r.get<std::string>()));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("config key '" + where + ".rules': " + e.what());
        }
    }
}

ojson rules_json(const std::vector<DecisionRule>& rules) {
    ojson a = ojson::array();
    for (const auto& r : rules) a.push_back(r.name());
    return a;
}

void parse_range(const ojson& j, const std::string& where, double& lo, double& hi) {
    if (!j.contains("a_range")) return;
    const auto& r = j.at("a_range");
    if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
        throw ConfigError("config key '" + where + ".a_range' must be [min, max]");
    lo = r[0].get<double>();
    hi = r[1].get<double>();
}

ojson trial_json(const TrialOptions& t) {
    ojson j;
    j["min_events"] = t.fit.min_events;
    j["fixed_b"] = optional_json(t.fit.fixed_b);
    j["fallback_label"] = t.fallback_label;
    j["max_events"] = t.max_events;
    return j;
}

void parse_trial(const ojson& j, TrialOptions& t) {
    check_keys(j, "trial", {"min_events", "fixed_b", "fallback_label", "max_events"});
    read(j, "min_events", "trial", t.fit.min_events);
    read_optional(j, "fixed_b", "trial", t.fit.fixed_b);
    read(j, "fallback_label", "trial", t.fallback_label);
    read(j, "max_events", "trial", t.max_events);
}

ojson to_ojson(const RunConfig& c) {
    ojson j;
    j["format"] = c.format;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["workers"] = c.workers;

    ojson e;
    e["mu"] = c.etas.mu;
    e["K0"] = c.etas.K0;
    e["alpha"] = c.etas.alpha;
    e["c"] = c.etas.c;
    e["p"] = c.etas.p;
    e["mc"] = c.etas.mc;
    e["b"] = c.etas.b;
    e["m_max"] = optional_json(c.etas.m_max);
    e["kernel"] = kernel_name(c.etas.kernel);
    j["etas"] = e;

    ojson s;
    s["horizon_days"] = c.sim.horizon_days;
    s["max_events"] = c.sim.max_events;
    s["a_value"] = optional_json(c.sim.a_value);
    s["a_window_days"] = c.sim.a_window_days;
    j["sim"] = s;

    ojson g;
    g["n_values"] = c.grid.n_values;
    g["m_th_values"] = c.grid.m_th_values;
    g["sims"] = c.grid.sims;
    g["sim_offset"] = c.grid.sim_offset;
    g["delta_days"] = c.grid.delta_days;
    g["a_range"] = {c.grid.a_min, c.grid.a_max};
    g["a_fixed"] = optional_json(c.grid.a_fixed);
    g["rules"] = rules_json(c.grid.rules);
    j["grid"] = g;

    ojson ss;
    ss["m_th_values"] = c.small_sample.m_th_values;
    ss["reps"] = c.small_sample.reps;
    ss["batch"] = c.small_sample.batch;
    ss["n"] = c.small_sample.n;
    ss["delta_days"] = c.small_sample.delta_days;
    ss["a_range"] = {c.small_sample.a_min, c.small_sample.a_max};
    ss["rules"] = rules_json(c.small_sample.rules);
    j["small_sample"] = ss;

    j["trial"] = trial_json(c.grid.trial);
    return j;
}

}  // namespace

EtasParams RunConfig::default_etas() {
    EtasParams p;
    p.kernel = OmoriKernel::Normalized;
    return p;
}

SimConfig RunConfig::default_sim() {
    SimConfig s;
    s.a_value = 5.0;
    return s;
}

GridSpec RunConfig::grid_spec() const {
    GridSpec g = grid;
    g.master_seed = derive_seed(seed, {0x47});
    g.etas = etas;
    g.workers = workers;
    return g;
}

SmallSampleSpec RunConfig::small_sample_spec() const {
    SmallSampleSpec s = small_sample;
    s.seed = derive_seed(seed, {0x53});
    s.etas = etas;
    s.trial = grid.trial;
    s.workers = workers;
    return s;
}

SimConfig RunConfig::sim_config() const {
    SimConfig s = sim;
    s.seed = derive_seed(seed, {0x43});
    return s;
}

void RunConfig::validate() const {
    if (format != kConfigFormat) throw ConfigError("config key 'format' must be '" + std::string(kConfigFormat) + "'");
    if (workers < 1) throw ConfigError("config key 'workers' must be >= 1");
    const auto wrap = [](const char* section, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string(section) + ": " + e.what());
        }
    };
    wrap("etas", [&] { etas.validate(); });
    wrap("sim", [&] { sim.validate(); });
    wrap("grid", [&] { grid_spec().validate(); });
    wrap("small_sample", [&] { small_sample_spec().validate(); });
    if (grid.trial.fallback_label != 0 && grid.trial.fallback_label != 1)
        throw ConfigError("config key 'trial.fallback_label' must be 0 or 1");
    if (grid.trial.max_events < 1) throw ConfigError("config key 'trial.max_events' must be >= 1");
}

RunConfig parse_config(const std::string& json_text) {
    ojson j;
    try {
        j = ojson::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    check_keys(j, "", {"format", "seed", "output_dir", "workers", "etas", "sim", "grid", "small_sample", "trial"});
    read(j, "format", "", c.format);
    read(j, "seed", "", c.seed);
    read(j, "output_dir", "", c.output_dir);
    read(j, "workers", "", c.workers);

    if (j.contains("etas")) {
        const auto& e = j.at("etas");
        check_keys(e, "etas", {"mu", "K0", "alpha", "c", "p", "mc", "b", "m_max", "kernel"});
        read(e, "mu", "etas", c.etas.mu);
        read(e, "K0", "etas", c.etas.K0);
        read(e, "alpha", "etas", c.etas.alpha);
        read(e, "c", "etas", c.etas.c);
        read(e, "p", "etas", c.etas.p);
        read(e, "mc", "etas", c.etas.mc);
        read(e, "b", "etas", c.etas.b);
        read_optional(e, "m_max", "etas", c.etas.m_max);
        std::string kernel = kernel_name(c.etas.kernel);
        read(e, "kernel", "etas", kernel);
        c.etas.kernel = parse_kernel(kernel);
    }
    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        check_keys(s, "sim", {"horizon_days", "max_events", "a_value", "a_window_days"});
        read(s, "horizon_days", "sim", c.sim.horizon_days);
        read(s, "max_events", "sim", c.sim.max_events);
        read_optional(s, "a_value", "sim", c.sim.a_value);
        read(s, "a_window_days", "sim", c.sim.a_window_days);
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        check_keys(g, "grid", {"n_values", "m_th_values", "sims", "sim_offset", "delta_days", "a_range", "a_fixed", "rules"});
        read(g, "n_values", "grid", c.grid.n_values);
        read(g, "m_th_values", "grid", c.grid.m_th_values);
        read(g, "sims", "grid", c.grid.sims);
        read(g, "sim_offset", "grid", c.grid.sim_offset);
        read(g, "delta_days", "grid", c.grid.delta_days);
        parse_range(g, "grid", c.grid.a_min, c.grid.a_max);
        read_optional(g, "a_fixed", "grid", c.grid.a_fixed);
        parse_rules(g, "grid", c.grid.rules);
    }
    if (j.contains("small_sample")) {
        const auto& s = j.at("small_sample");
        check_keys(s, "small_sample", {"m_th_values", "reps", "batch", "n", "delta_days", "a_range", "rules"});
        read(s, "m_th_values", "small_sample", c.small_sample.m_th_values);
        read(s, "reps", "small_sample", c.small_sample.reps);
        read(s, "batch", "small_sample", c.small_sample.batch);
        read(s, "n", "small_sample", c.small_sample.n);
        read(s, "delta_days", "small_sample", c.small_sample.delta_days);
        parse_range(s, "small_sample", c.small_sample.a_min, c.small_sample.a_max);
        parse_rules(s, "small_sample", c.small_sample.rules);
    }
    if (j.contains("trial")) parse_trial(j.at("trial"), c.grid.trial);
    c.validate();
    return c;
}

std::string config_to_json(const RunConfig& config, int indent) { return to_ojson(config).dump(indent); }

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const RunConfig& config) {
    auto j = to_ojson(config);
    j.erase("output_dir");
    j.erase("workers");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

}  // namespace eqbase
