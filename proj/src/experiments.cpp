#include "eqbase/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace eqbase {

namespace {

using ojson = nlohmann::ordered_json;

// Runs body(i) for i in [0, count) on `workers` threads. Each index writes
// only its own output slot, so scheduling never affects results.
template <typename Body>
void parallel_for(std::uint64_t count, unsigned workers, const Progress& progress, Body body) {
    std::atomic<std::uint64_t> next{0};
    std::atomic<std::uint64_t> done{0};
    std::mutex progress_mutex;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const std::uint64_t report_every = std::max<std::uint64_t>(1, count / 100);

    auto worker = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
                return;
            }
            const auto d = done.fetch_add(1) + 1;
            if (progress && (d % report_every == 0 || d == count)) {
                std::lock_guard lock(progress_mutex);
                progress(d, count);
            }
        }
    };

    const unsigned n = std::max(1u, workers);
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
}

void validate_rules(const std::vector<DecisionRule>& rules) {
    if (rules.empty()) throw std::invalid_argument("at least one decision rule is required");
}

ojson skill_json(const ConfusionCounts& c) {
    const auto s = skill(c);
    ojson j;
    j["tp"] = c.tp;
    j["fn"] = c.fn;
    j["tn"] = c.tn;
    j["fp"] = c.fp;
    j["tpr"] = s.tpr ? ojson(*s.tpr) : ojson(nullptr);
    j["tnr"] = s.tnr ? ojson(*s.tnr) : ojson(nullptr);
    j["r"] = s.r_score ? ojson(*s.r_score) : ojson(nullptr);
    return j;
}

TrialOutcome simulate_one(const EtasParams& base, const TrialSpec& trial, const TrialOptions& opts,
                          std::uint64_t seed, std::optional<double> a_fixed, double a_min,
                          double a_max) {
    EtasParams params = base;
    const double a = a_fixed ? *a_fixed : trial_a_value(seed, a_min, a_max);
    params.mu = mu_from_a(a, params.b, params.mc, trial.delta_days);
    return evaluate_trial(params, trial, seed, opts);
}

}  // namespace

void GridSpec::validate() const {
    if (n_values.empty() || m_th_values.empty()) throw std::invalid_argument("grid: empty axis");
    for (int n : n_values)
        if (n < 1) throw std::invalid_argument("grid.n_values: n must be >= 1");
    if (sims < 1) throw std::invalid_argument("grid.sims must be >= 1");
    if (!(delta_days > 0.0)) throw std::invalid_argument("grid.delta_days must be > 0");
    if (!a_fixed && !(a_max > a_min)) throw std::invalid_argument("grid.a_range must be non-degenerate");
    validate_rules(rules);
    etas.validate();
}

const ConfusionCounts& GridCell::counts(const DecisionRule& rule) const {
    for (const auto& rc : rules)
        if (rc.rule == rule) return rc.counts;
    throw std::out_of_range("grid cell has no rule " + rule.name());
}

const GridCell& GridResult::cell(int n, double m_th) const {
    for (const auto& c : cells)
        if (c.n == n && c.m_th == m_th) return c;
    throw std::out_of_range("grid has no cell n=" + std::to_string(n));
}

std::uint64_t GridResult::sims() const {
    std::uint64_t s = 0;
    for (const auto& c : cells) s += c.sims;
    return s;
}

std::uint64_t GridResult::truncations() const {
    std::uint64_t s = 0;
    for (const auto& c : cells) s += c.truncations;
    return s;
}

std::uint64_t GridResult::fit_failures() const {
    std::uint64_t s = 0;
    for (const auto& c : cells) s += c.fit_failures;
    return s;
}

std::uint64_t trial_seed(std::uint64_t master, int n, double m_th, std::uint64_t index) {
    return derive_seed(master, {static_cast<std::uint64_t>(n), std::bit_cast<std::uint64_t>(m_th), index});
}

double trial_a_value(std::uint64_t seed, double a_min, double a_max) {
    Rng rng(derive_seed(seed, {0xA}));
    return a_min + (a_max - a_min) * uniform_open(rng);
}

GridResult run_grid(const GridSpec& spec, const Progress& progress) {
    spec.validate();
    struct CellKey {
        int n;
        double m_th;
    };
    std::vector<CellKey> keys;
    for (int n : spec.n_values)
        for (double m : spec.m_th_values) keys.push_back({n, m});

    const std::uint64_t total = keys.size() * spec.sims;
    std::vector<TrialOutcome> outcomes(total);
    parallel_for(total, spec.workers, progress, [&](std::uint64_t task) {
        const auto& key = keys[task / spec.sims];
        const std::uint64_t index = spec.sim_offset + task % spec.sims;
        TrialSpec trial{spec.delta_days, key.n, key.m_th};
        outcomes[task] = simulate_one(spec.etas, trial, spec.trial,
                                      trial_seed(spec.master_seed, key.n, key.m_th, index),
                                      spec.a_fixed, spec.a_min, spec.a_max);
    });

    GridResult result;
    result.master_seed = spec.master_seed;
    for (std::size_t c = 0; c < keys.size(); ++c) {
        GridCell cell;
        cell.n = keys[c].n;
        cell.m_th = keys[c].m_th;
        for (const auto& r : spec.rules) cell.rules.push_back({r, {}});
        for (std::uint64_t i = 0; i < spec.sims; ++i) {
            const auto& o = outcomes[c * spec.sims + i];
            ++cell.sims;
            cell.truncations += o.truncated;
            cell.fit_failures += o.fit_failed;
            cell.positives += o.true_label;
            for (auto& rc : cell.rules) rc.counts.add(forecast_label(o, rc.rule, spec.trial), o.true_label);
        }
        result.cells.push_back(std::move(cell));
    }
    return result;
}

GridResult merge(const GridResult& a, const GridResult& b) {
    if (a.cells.size() != b.cells.size()) throw std::invalid_argument("merge: grids differ in shape");
    GridResult out = a;
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        auto& c = out.cells[i];
        const auto& d = b.cells[i];
        if (c.n != d.n || c.m_th != d.m_th || c.rules.size() != d.rules.size())
            throw std::invalid_argument("merge: grids differ in cells");
        c.sims += d.sims;
        c.truncations += d.truncations;
        c.fit_failures += d.fit_failures;
        c.positives += d.positives;
        for (std::size_t r = 0; r < c.rules.size(); ++r) {
            if (!(c.rules[r].rule == d.rules[r].rule)) throw std::invalid_argument("merge: rules differ");
            c.rules[r].counts += d.rules[r].counts;
        }
    }
    return out;
}

namespace {

std::optional<GridMaximum> grid_max(const GridResult& result, const DecisionRule& rule,
                                    HeatmapValue what) {
    std::optional<GridMaximum> best;
    for (const auto& c : result.cells) {
        const auto s = skill(c.counts(rule));
        const auto v = what == HeatmapValue::Tpr ? s.tpr : s.r_score;
        if (v && (!best || *v > best->value)) best = GridMaximum{rule, c.n, c.m_th, *v};
    }
    return best;
}

}  // namespace

std::optional<GridMaximum> max_tpr(const GridResult& result, const DecisionRule& rule) {
    return grid_max(result, rule, HeatmapValue::Tpr);
}

std::optional<GridMaximum> max_r_score(const GridResult& result, const DecisionRule& rule) {
    return grid_max(result, rule, HeatmapValue::RScore);
}

std::string grid_to_json(const GridResult& result, const std::string& extra_meta_json) {
    ojson cells = ojson::array();
    for (const auto& c : result.cells) {
        ojson cj;
        cj["n"] = c.n;
        cj["delta_r"] = c.delta_r();
        cj["m_th"] = c.m_th;
        cj["sims"] = c.sims;
        cj["positives"] = c.positives;
        cj["truncations"] = c.truncations;
        cj["fit_failures"] = c.fit_failures;
        ojson rules;
        for (const auto& rc : c.rules) rules[rc.rule.name()] = skill_json(rc.counts);
        cj["rules"] = rules;
        cells.push_back(cj);
    }
    ojson meta = ojson::parse(extra_meta_json);
    meta["seed"] = result.master_seed;
    meta["sims"] = result.sims();
    meta["truncations"] = result.truncations();
    meta["fit_failures"] = result.fit_failures();
    ojson j;
    j["cells"] = cells;
    j["meta"] = meta;
    return j.dump(2);
}

void write_heatmap_csv(std::ostream& os, const GridResult& result, const DecisionRule& rule,
                       HeatmapValue value) {
    std::vector<int> ns;
    std::vector<double> ms;
    for (const auto& c : result.cells) {
        if (std::find(ns.begin(), ns.end(), c.n) == ns.end()) ns.push_back(c.n);
        if (std::find(ms.begin(), ms.end(), c.m_th) == ms.end()) ms.push_back(c.m_th);
    }
    char buf[64];
    os << "delta_r";
    for (double m : ms) {
        std::snprintf(buf, sizeof buf, ",m_th=%g", m);
        os << buf;
    }
    os << '\n';
    for (int n : ns) {
        std::snprintf(buf, sizeof buf, "%.17g", 1.0 / n);
        os << buf;
        for (double m : ms) {
            const auto s = skill(result.cell(n, m).counts(rule));
            const auto v = value == HeatmapValue::Tpr ? s.tpr : s.r_score;
            if (v) {
                std::snprintf(buf, sizeof buf, ",%.17g", *v);
                os << buf;
            } else {
                os << ",nan";
            }
        }
        os << '\n';
    }
}

void SmallSampleSpec::validate() const {
    if (m_th_values.empty()) throw std::invalid_argument("small_sample.m_th_values is empty");
    if (reps < 1) throw std::invalid_argument("small_sample.reps must be >= 1");
    if (batch < 1) throw std::invalid_argument("small_sample.batch must be >= 1");
    if (n < 1) throw std::invalid_argument("small_sample.n must be >= 1");
    if (!(a_max > a_min)) throw std::invalid_argument("small_sample.a_range must be non-degenerate");
    validate_rules(rules);
    etas.validate();
}

const SmallSampleSeries& SmallSampleResult::get(double m_th, const DecisionRule& rule) const {
    for (const auto& s : series)
        if (s.m_th == m_th && s.rule == rule) return s;
    throw std::out_of_range("small-sample result has no series for rule " + rule.name());
}

SmallSampleResult run_small_sample(const SmallSampleSpec& spec, const Progress& progress) {
    spec.validate();
    const std::uint64_t per_threshold = spec.reps * spec.batch;
    const std::uint64_t total = spec.m_th_values.size() * per_threshold;
    const std::uint64_t master = derive_seed(spec.seed, {0x5353});
    std::vector<TrialOutcome> outcomes(total);
    parallel_for(total, spec.workers, progress, [&](std::uint64_t task) {
        const double m_th = spec.m_th_values[task / per_threshold];
        const std::uint64_t index = task % per_threshold;
        TrialSpec trial{spec.delta_days, spec.n, m_th};
        outcomes[task] = simulate_one(spec.etas, trial, spec.trial,
                                      trial_seed(master, spec.n, m_th, index), std::nullopt,
                                      spec.a_min, spec.a_max);
    });

    SmallSampleResult result;
    for (std::size_t t = 0; t < spec.m_th_values.size(); ++t) {
        for (const auto& rule : spec.rules) {
            SmallSampleSeries s;
            s.m_th = spec.m_th_values[t];
            s.rule = rule;
            for (std::uint64_t rep = 0; rep < spec.reps; ++rep) {
                ConfusionCounts c;
                for (std::uint64_t j = 0; j < spec.batch; ++j) {
                    const auto& o = outcomes[t * per_threshold + rep * spec.batch + j];
                    c.add(forecast_label(o, rule, spec.trial), o.true_label);
                }
                const auto r = skill(c).r_score;
                s.reps.push_back(c);
                s.r_scores.push_back(r);
                if (!r) {
                    ++s.undefined;
                    continue;
                }
                if (!s.min_r || *r < *s.min_r) s.min_r = r;
                if (!s.max_r || *r > *s.max_r) s.max_r = r;
            }
            result.series.push_back(std::move(s));
        }
    }
    return result;
}

std::string small_sample_to_json(const SmallSampleResult& result,
                                 const std::string& extra_meta_json) {
    ojson series = ojson::array();
    for (const auto& s : result.series) {
        ojson sj;
        sj["m_th"] = s.m_th;
        sj["rule"] = s.rule.name();
        sj["reps"] = s.reps.size();
        sj["undefined"] = s.undefined;
        sj["min_r"] = s.min_r ? ojson(*s.min_r) : ojson(nullptr);
        sj["max_r"] = s.max_r ? ojson(*s.max_r) : ojson(nullptr);
        ojson rs = ojson::array();
        for (const auto& r : s.r_scores) rs.push_back(r ? ojson(*r) : ojson(nullptr));
        sj["r_scores"] = rs;
        series.push_back(sj);
    }
    ojson j;
    j["series"] = series;
    j["meta"] = ojson::parse(extra_meta_json);
    return j.dump(2);
}

}  // namespace eqbase
