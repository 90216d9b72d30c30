#include "eqbase/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "eqbase/aftershock.hpp"
#include "eqbase/config.hpp"
#include "eqbase/logreg.hpp"
#include "eqbase/skill.hpp"
#include "eqbase/stress.hpp"

namespace eqbase {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Runtime failure (IO, data) as opposed to a validation problem.
class RuntimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ojson input_meta(const std::string& path) {
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(read_file(path))));
    return {{"file", fs::path(path).filename().string()}, {"fnv1a64", hex}};
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string file_tag(const DecisionRule& r) {
    std::string s = r.name();
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

// Options shared by the experiment commands.
struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out;
    std::optional<std::string> kernel;
    std::optional<double> m_max;
    bool unbounded = false;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "Run configuration JSON");
        app->add_option("--seed", seed, "Master seed (overrides config)");
        app->add_option("--workers", workers, "Worker threads; results do not depend on it");
        app->add_option("--out", out, "Output directory (overrides config)");
        app->add_option("--kernel", kernel, "Omori kernel: literal | normalized");
        app->add_option("--m-max", m_max, "Magnitude truncation");
        app->add_flag("--unbounded", unbounded, "No magnitude truncation");
    }

    RunConfig load() const {
        RunConfig c = config_path.empty() ? RunConfig{} : parse_config(read_file(config_path));
        if (seed) c.seed = *seed;
        if (workers) c.workers = *workers;
        if (out) c.output_dir = *out;
        if (kernel) {
            if (*kernel == "literal") c.etas.kernel = OmoriKernel::Literal;
            else if (*kernel == "normalized") c.etas.kernel = OmoriKernel::Normalized;
            else throw ConfigError("--kernel must be 'literal' or 'normalized'");
        }
        if (m_max) c.etas.m_max = *m_max;
        if (unbounded) c.etas.m_max.reset();
        return c;
    }
};

ojson meta_json(const RunConfig& c) {
    ojson m;
    m["tool_version"] = kToolVersion;
    m["config_hash"] = config_hash(c);
    m["master_seed"] = c.seed;
    return m;
}

std::vector<DecisionRule> parse_rules(const std::vector<std::string>& names) {
    std::vector<DecisionRule> rules;
    for (const auto& n : names) {
        try {
            rules.push_back(DecisionRule::parse(n));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("--rules: ") + e.what());
        }
    }
    return rules;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const RunConfig& cfg, std::uint64_t count, std::ostream& out) {
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    const SimConfig base = cfg.sim_config();
    ojson catalogs = ojson::array();
    for (std::uint64_t i = 0; i < count; ++i) {
        SimConfig sc = base;
        sc.seed = derive_seed(base.seed, {i});
        const Catalog cat = simulate_catalog(cfg.etas, sc);
        char name[64];
        std::snprintf(name, sizeof name, "catalog_%06llu.csv", static_cast<unsigned long long>(i));
        auto f = open_out(dir / name);
        write_catalog_csv(f, cat);
        ojson entry;
        entry["file"] = name;
        entry["seed"] = sc.seed;
        entry["events"] = cat.events.size();
        entry["truncated"] = cat.truncated;
        catalogs.push_back(entry);
    }
    ojson manifest;
    manifest["meta"] = meta_json(cfg);
    auto config = ojson::parse(config_to_json(cfg));
    config.erase("output_dir");
    config.erase("workers");
    manifest["config"] = config;
    manifest["count"] = count;
    manifest["catalogs"] = catalogs;
    write_text(dir / "manifest.json", manifest.dump(2));
    out << "wrote " << count << " catalog(s) to " << dir.string() << '\n';
    return kExitOk;
}

// -------------------------------------------------------------------- grid

int cmd_grid(const RunConfig& cfg, bool quiet, std::ostream& out, std::ostream& err) {
    const GridSpec spec = cfg.grid_spec();
    Progress progress;
    if (!quiet)
        progress = [&err](std::uint64_t done, std::uint64_t total) {
            err << "\rgrid: " << done << "/" << total << std::flush;
            if (done == total) err << '\n';
        };
    const GridResult result = run_grid(spec, progress);

    const fs::path dir = cfg.output_dir;
    auto meta = meta_json(cfg);
    write_text(dir / "grid_results.json", grid_to_json(result, meta.dump()));
    for (const auto& rule : spec.rules) {
        auto tpr = open_out(dir / ("heatmap_tpr_" + file_tag(rule) + ".csv"));
        write_heatmap_csv(tpr, result, rule, HeatmapValue::Tpr);
        auto r = open_out(dir / ("heatmap_r_" + file_tag(rule) + ".csv"));
        write_heatmap_csv(r, result, rule, HeatmapValue::RScore);
    }
    for (const auto& rule : spec.rules) {
        out << "rule " << rule.name() << ':';
        if (auto m = max_tpr(result, rule))
            out << " max TPR " << fmt(m->value) << " at (delta_r=1/" << m->n << ", m_th=" << m->m_th << ")";
        else
            out << " max TPR undefined";
        if (auto m = max_r_score(result, rule))
            out << ", max R " << fmt(m->value) << " at (delta_r=1/" << m->n << ", m_th=" << m->m_th << ")";
        else
            out << ", max R undefined";
        out << '\n';
    }
    out << "sims/cell " << spec.sims << ", truncations " << result.truncations() << ", fit failures "
        << result.fit_failures() << '\n';
    return kExitOk;
}

// ------------------------------------------------------------ small-sample

int cmd_small_sample(const RunConfig& cfg, std::ostream& out) {
    const auto spec = cfg.small_sample_spec();
    const auto result = run_small_sample(spec);
    const fs::path dir = cfg.output_dir;
    write_text(dir / "small_sample.json", small_sample_to_json(result, meta_json(cfg).dump()));
    for (const auto& s : result.series) {
        out << "m_th=" << s.m_th << " rule " << s.rule.name() << ": R in [";
        out << (s.min_r ? fmt(*s.min_r) : "undef") << ", " << (s.max_r ? fmt(*s.max_r) : "undef");
        out << "], undefined " << s.undefined << "/" << s.reps.size() << '\n';
    }
    return kExitOk;
}

// --------------------------------------------------------- stress-features

int cmd_stress_features(const std::string& in_path, const std::string& out_path, std::ostream& out) {
    std::ifstream in(in_path);
    if (!in) throw RuntimeError("cannot open '" + in_path + "'");
    const auto rows = read_tensor_csv(in);
    auto f = open_out(out_path);
    write_feature_csv(f, rows);
    out << "wrote " << rows.size() << " feature rows to " << out_path << '\n';
    return kExitOk;
}

// -------------------------------------------------------------- synth-grid

struct SynthOptions {
    std::vector<double> slips{1.0};
    double length = 20.0;
    double width = 10.0;
    double strike = 0.0;
    double dip = 90.0;
    double beta0 = 8.0;
    double beta1 = 2.5;
    double beta2 = 1.0;
    CellGridSpec grid;
    std::uint64_t seed = 1;
    std::string out_dir = "synth";
};

int cmd_synth_grid(const SynthOptions& o, std::ostream& out) {
    LogisticModel truth{o.beta0, {o.beta1, o.beta2}, feature_spec(FeatureSet::DistanceSlip)};
    std::vector<CellSample> cells;
    for (std::size_t i = 0; i < o.slips.size(); ++i) {
        RuptureGeom g;
        g.length_km = o.length;
        g.width_km = o.width;
        g.strike_deg = o.strike;
        g.dip_deg = o.dip;
        g.slip_m = o.slips[i];
        auto part = synth_grid(g, o.grid, truth, derive_seed(o.seed, {i}));
        cells.insert(cells.end(), part.begin(), part.end());
    }
    const fs::path dir = o.out_dir;
    {
        auto f = open_out(dir / "cells.csv");
        write_cells_csv(f, cells);
    }
    if (o.grid.with_stress) {
        auto f = open_out(dir / "features.csv");
        write_cell_features_csv(f, cells);
    }
    ojson truth_json = ojson::parse(model_to_json(truth));
    truth_json["meta"] = {{"tool_version", kToolVersion}, {"seed", o.seed}};
    write_text(dir / "truth.json", truth_json.dump(2));
    const auto pos = std::count_if(cells.begin(), cells.end(), [](const CellSample& c) { return c.label == 1; });
    out << "wrote " << cells.size() << " cells (" << pos << " positive) to " << dir.string() << '\n';
    return kExitOk;
}

// ------------------------------------------------------------------ logreg

struct LogregOptions {
    std::string in_path;
    std::vector<std::string> feature_sets{"rd"};
    double l2 = -1.0;  // < 0: per-feature-set default
    double holdout = 0.3;
    double tolerance = 1e-8;
    int max_iterations = 20000;
    std::uint64_t seed = 1;
    std::string out_dir = "logreg";
};

// Deterministic Fisher-Yates on our own uniform draws.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, {0x5A}));
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_open(rng) * static_cast<double>(i));
        std::swap(idx[i - 1], idx[std::min(j, i - 1)]);
    }
    return idx;
}

int cmd_logreg(const LogregOptions& o, std::ostream& out) {
    if (!(o.holdout >= 0.0 && o.holdout < 1.0)) throw ConfigError("--holdout must be in [0, 1)");
    if (!fs::exists(o.in_path)) throw RuntimeError("cannot open '" + o.in_path + "'");
    ojson report;
    report["meta"] = {{"tool_version", kToolVersion}, {"seed", o.seed}, {"input", input_meta(o.in_path)}};
    ojson models = ojson::array();
    for (const auto& name : o.feature_sets) {
        FeatureSet fset;
        try {
            fset = parse_feature_set(name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("--features: ") + e.what());
        }
        std::ifstream in(o.in_path);
        const Dataset all = read_dataset_csv(in, fset);

        const auto idx = shuffled_indices(all.rows(), o.seed);
        const auto n_test = static_cast<std::size_t>(o.holdout * static_cast<double>(all.rows()));
        std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + static_cast<long>(n_test));
        std::vector<std::size_t> train_idx(idx.begin() + static_cast<long>(n_test), idx.end());
        std::sort(test_idx.begin(), test_idx.end());
        std::sort(train_idx.begin(), train_idx.end());
        const Dataset train = all.subset(train_idx);
        const Dataset test = n_test > 0 ? all.subset(test_idx) : all;

        LogisticFitOptions fo;
        fo.l2 = o.l2 >= 0.0 ? o.l2 : (fset == FeatureSet::Stress12 ? 1e-4 : 0.0);
        fo.tolerance = o.tolerance;
        fo.max_iterations = o.max_iterations;
        LogisticFit fit;
        try {
            fit = fit_logistic(train, fo);
        } catch (const std::invalid_argument& e) {
            throw RuntimeError(std::string("cannot fit ") + name + ": " + e.what());
        }
        double auc;
        try {
            auc = evaluate_auc(fit.model, test);
        } catch (const std::invalid_argument& e) {
            throw RuntimeError(std::string("cannot score ") + name + ": " + e.what());
        }

        ojson model = ojson::parse(model_to_json(fit.model));
        model["meta"] = report["meta"];
        write_text(fs::path(o.out_dir) / ("model_" + to_string(fset) + ".json"), model.dump(2));

        ojson entry;
        entry["features"] = to_string(fset);
        entry["intercept"] = fit.model.intercept;
        entry["weights"] = fit.model.weights;
        entry["status"] = to_string(fit.status);
        entry["iterations"] = fit.iterations;
        entry["gradient_norm"] = fit.gradient_norm;
        entry["l2"] = fo.l2;
        entry["train_rows"] = train.rows();
        entry["test_rows"] = test.rows();
        entry["auc"] = auc;
        if (fset == FeatureSet::DistanceSlip) {
            const auto pl = to_power_law(fit.model);
            entry["power_law"] = {{"beta0_hat", pl.beta0_hat}, {"beta1", pl.beta1}, {"beta2", pl.beta2}};
        }
        models.push_back(entry);

        out << to_string(fset) << ": AUC " << fmt(auc) << " (" << to_string(fit.status) << ", "
            << fit.iterations << " iterations) intercept " << fit.model.intercept << " weights [";
        for (std::size_t k = 0; k < fit.model.weights.size(); ++k)
            out << (k ? ", " : "") << fit.model.weights[k];
        out << "]\n";
    }
    report["models"] = models;
    write_text(fs::path(o.out_dir) / "auc_report.json", report.dump(2));
    return kExitOk;
}

// ----------------------------------------------------------------- metrics

int cmd_metrics(const std::string& in_path, const std::string& out_path, std::ostream& out) {
    std::ifstream in(in_path);
    if (!in) throw RuntimeError("cannot open '" + in_path + "'");
    std::string header;
    std::getline(in, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    const bool pairs = header == "predicted,true";
    if (!pairs && header != "score,label")
        throw RuntimeError("metrics: header must be 'predicted,true' or 'score,label'");

    std::vector<LabelPair> labels;
    std::vector<ScoredLabel> scored;
    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        double a = 0.0;
        int b = 0;
        char comma = 0;
        if (!(ss >> a >> comma >> b) || comma != ',' || (b != 0 && b != 1))
            throw RuntimeError("metrics: malformed row " + std::to_string(row));
        if (pairs) {
            if (a != 0.0 && a != 1.0) throw RuntimeError("metrics: predicted must be 0 or 1 on row " + std::to_string(row));
            labels.emplace_back(static_cast<int>(a), b);
        } else {
            scored.emplace_back(a, b);
        }
    }

    ojson j;
    const auto opt = [](const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); };
    if (pairs) {
        const auto c = confusion(labels);
        const auto s = skill(c);
        j = {{"tp", c.tp}, {"fn", c.fn}, {"tn", c.tn}, {"fp", c.fp},
             {"tpr", opt(s.tpr)}, {"tnr", opt(s.tnr)}, {"r", opt(s.r_score)}};
    } else {
        j = {{"n", scored.size()}, {"auc", opt(roc_auc(scored))}};
    }
    j["meta"] = {{"tool_version", kToolVersion}, {"input", input_meta(in_path)}};
    const std::string text = j.dump(2);
    if (out_path.empty()) out << text << '\n';
    else write_text(out_path, text);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Baseline laboratory for earthquake-prediction skill assessment", "eqbase"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    Common sim_common, grid_common, small_common;
    std::uint64_t count = 1;
    std::optional<double> horizon, a_value, mu, k0;
    std::optional<std::size_t> max_events;
    auto* sim = app.add_subcommand("simulate", "Simulate ETAS catalogs");
    sim_common.attach(sim);
    sim->add_option("--count", count, "Number of catalogs");
    sim->add_option("--horizon", horizon, "Horizon in days");
    sim->add_option("--a-value", a_value, "Activity a (sets mu)");
    sim->add_option("--mu", mu, "Background rate per day");
    sim->add_option("--K0", k0, "Productivity coefficient");
    sim->add_option("--max-events", max_events, "Event cap per catalog");

    std::optional<std::uint64_t> sims, offset;
    std::vector<int> n_values;
    std::vector<double> m_values;
    std::vector<std::string> rule_names;
    bool quiet = false;
    auto* grid = app.add_subcommand("grid", "Run the (delta_r, m_th) skill grid");
    grid_common.attach(grid);
    grid->add_option("--sims", sims, "Simulations per cell");
    grid->add_option("--sim-offset", offset, "First simulation index");
    grid->add_option("--n", n_values, "Training multipliers n (delta_r = 1/n)");
    grid->add_option("--m-th", m_values, "Magnitude thresholds");
    grid->add_option("--rules", rule_names, "Decision rules");
    grid->add_flag("--quiet", quiet, "No progress output");

    std::optional<std::uint64_t> reps, batch;
    std::vector<double> small_m;
    auto* small = app.add_subcommand("small-sample", "Skill spread over small batches");
    small_common.attach(small);
    small->add_option("--reps", reps, "Repetitions");
    small->add_option("--batch", batch, "Simulations per repetition");
    small->add_option("--m-th", small_m, "Magnitude thresholds");

    std::string sf_in, sf_out;
    auto* sf = app.add_subcommand("stress-features", "Tensor CSV to 12-feature CSV");
    sf->add_option("--in", sf_in, "Tensor CSV")->required();
    sf->add_option("--out", sf_out, "Feature CSV")->required();

    SynthOptions so;
    auto* sg = app.add_subcommand("synth-grid", "Synthetic labelled aftershock cells");
    sg->add_option("--out", so.out_dir, "Output directory");
    sg->add_option("--seed", so.seed, "Seed");
    sg->add_option("--slip", so.slips, "Mean slip per rupture (m); one grid per value");
    sg->add_option("--length", so.length, "Rupture length (km)");
    sg->add_option("--width", so.width, "Rupture width (km)");
    sg->add_option("--strike", so.strike, "Strike (deg)");
    sg->add_option("--dip", so.dip, "Dip (deg)");
    sg->add_option("--beta0", so.beta0, "Truth intercept");
    sg->add_option("--beta1", so.beta1, "Truth distance exponent");
    sg->add_option("--beta2", so.beta2, "Truth slip exponent");
    sg->add_option("--half-extent", so.grid.half_extent_km, "Horizontal half extent (km)");
    sg->add_option("--half-depth", so.grid.half_depth_km, "Vertical half extent (km)");
    sg->add_option("--spacing", so.grid.spacing_km, "Cell spacing (km)");
    sg->add_flag("--stress", so.grid.with_stress, "Also write synthetic stress features");

    LogregOptions lo;
    auto* lr = app.add_subcommand("logreg", "Fit single-neuron baselines");
    lr->add_option("--in", lo.in_path, "Cell or feature CSV")->required();
    lr->add_option("--features", lo.feature_sets, "rd | A | stress12 | vonmises | maxshear");
    lr->add_option("--l2", lo.l2, "L2 penalty (default 1e-4 for stress12, else 0)");
    lr->add_option("--holdout", lo.holdout, "Held-out fraction for AUC");
    lr->add_option("--tolerance", lo.tolerance, "Gradient-norm tolerance");
    lr->add_option("--max-iterations", lo.max_iterations, "Iteration cap");
    lr->add_option("--seed", lo.seed, "Split seed");
    lr->add_option("--out", lo.out_dir, "Output directory");

    std::string m_in, m_out;
    auto* mt = app.add_subcommand("metrics", "Skill scores from label pairs or AUC from scores");
    mt->add_option("--in", m_in, "CSV with header predicted,true or score,label")->required();
    mt->add_option("--out", m_out, "Output JSON (default stdout)");

    std::vector<std::string> argv_store;
    argv_store.push_back("eqbase");
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        if (*sim) {
            RunConfig c = sim_common.load();
            if (horizon) c.sim.horizon_days = *horizon;
            if (a_value) c.sim.a_value = *a_value;
            if (mu) {
                c.etas.mu = *mu;
                c.sim.a_value.reset();
            }
            if (k0) c.etas.K0 = *k0;
            if (max_events) c.sim.max_events = *max_events;
            c.validate();
            return cmd_simulate(c, count, out);
        }
        if (*grid) {
            RunConfig c = grid_common.load();
            if (sims) c.grid.sims = *sims;
            if (offset) c.grid.sim_offset = *offset;
            if (!n_values.empty()) c.grid.n_values = n_values;
            if (!m_values.empty()) c.grid.m_th_values = m_values;
            if (!rule_names.empty()) c.grid.rules = parse_rules(rule_names);
            c.validate();
            return cmd_grid(c, quiet, out, err);
        }
        if (*small) {
            RunConfig c = small_common.load();
            if (reps) c.small_sample.reps = *reps;
            if (batch) c.small_sample.batch = *batch;
            if (!small_m.empty()) c.small_sample.m_th_values = small_m;
            c.validate();
            return cmd_small_sample(c, out);
        }
        if (*sf) return cmd_stress_features(sf_in, sf_out, out);
        if (*sg) {
            try {
                so.grid.validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            return cmd_synth_grid(so, out);
        }
        if (*lr) return cmd_logreg(lo, out);
        if (*mt) return cmd_metrics(m_in, m_out, out);
    } catch (const ConfigError& e) {
        err << "invalid configuration: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace eqbase
