#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eqbase/etas.hpp"
#include "eqbase/gr_baseline.hpp"
#include "eqbase/skill.hpp"

namespace eqbase {

/// Monte Carlo grid over (n, m_th). Each simulation draws its own a-value,
/// simulates [0, (n+1) delta] and is scored under every rule.
struct GridSpec {
    std::vector<int> n_values{1, 4, 9};
    std::vector<double> m_th_values{4.0, 5.0, 6.0, 7.0};
    std::uint64_t sims = 10'000;
    /// First simulation index; lets a grid be split into disjoint runs.
    std::uint64_t sim_offset = 0;
    double delta_days = 100.0;
    double a_min = 4.0;
    double a_max = 6.0;
    /// Pins every simulation to this a-value when set.
    std::optional<double> a_fixed;
    std::vector<DecisionRule> rules{DecisionRule::poisson_half(), DecisionRule::rate_at_least(0.5),
                                    DecisionRule::rate_at_least(1.0)};
    std::uint64_t master_seed = 1;
    EtasParams etas;
    TrialOptions trial;
    unsigned workers = 1;

    void validate() const;
};

struct RuleCounts {
    DecisionRule rule;
    ConfusionCounts counts;
};

struct GridCell {
    int n = 1;
    double m_th = 0.0;
    std::uint64_t sims = 0;
    std::uint64_t truncations = 0;
    std::uint64_t fit_failures = 0;
    std::uint64_t positives = 0;
    std::vector<RuleCounts> rules;

    double delta_r() const { return 1.0 / n; }
    const ConfusionCounts& counts(const DecisionRule& rule) const;
};

struct GridResult {
    std::uint64_t master_seed = 0;
    std::vector<GridCell> cells;

    const GridCell& cell(int n, double m_th) const;
    std::uint64_t sims() const;
    std::uint64_t truncations() const;
    std::uint64_t fit_failures() const;
};

/// Seed of simulation `index` in cell (n, m_th).
std::uint64_t trial_seed(std::uint64_t master, int n, double m_th, std::uint64_t index);

/// a-value of a simulation, drawn from its own stream.
double trial_a_value(std::uint64_t trial_seed, double a_min, double a_max);

/// Progress callback: (done, total). Must not influence results.
using Progress = std::function<void(std::uint64_t, std::uint64_t)>;

GridResult run_grid(const GridSpec& spec, const Progress& progress = {});

/// Cell-wise sum of two runs over the same cells and rules.
GridResult merge(const GridResult& a, const GridResult& b);

struct GridMaximum {
    DecisionRule rule;
    int n = 0;
    double m_th = 0.0;
    double value = 0.0;
};

/// Cell with the largest TPR (or R-score) under `rule`; nullopt if every cell is undefined.
std::optional<GridMaximum> max_tpr(const GridResult& result, const DecisionRule& rule);
std::optional<GridMaximum> max_r_score(const GridResult& result, const DecisionRule& rule);

/// Results JSON: cells with per-rule counts and scores, plus a `meta` block.
std::string grid_to_json(const GridResult& result, const std::string& extra_meta_json = "{}");

enum class HeatmapValue { Tpr, RScore };

/// Rows delta_r (= 1/n), columns m_th; undefined values written as `nan`.
void write_heatmap_csv(std::ostream& os, const GridResult& result, const DecisionRule& rule,
                       HeatmapValue value);

/// Repeated small batches to expose how unstable skill scores are when few
/// positives are available.
struct SmallSampleSpec {
    std::vector<double> m_th_values{6.0, 7.0};
    std::uint64_t reps = 100;
    std::uint64_t batch = 10;
    int n = 4;
    double delta_days = 100.0;
    double a_min = 4.0;
    double a_max = 6.0;
    std::vector<DecisionRule> rules{DecisionRule::poisson_half(), DecisionRule::rate_at_least(0.5),
                                    DecisionRule::rate_at_least(1.0)};
    std::uint64_t seed = 1;
    EtasParams etas;
    TrialOptions trial;
    unsigned workers = 1;

    void validate() const;
};

struct SmallSampleSeries {
    double m_th = 0.0;
    DecisionRule rule;
    std::vector<ConfusionCounts> reps;
    /// R-score per rep, nullopt where a class is missing.
    std::vector<std::optional<double>> r_scores;
    std::uint64_t undefined = 0;
    std::optional<double> min_r;
    std::optional<double> max_r;
};

struct SmallSampleResult {
    std::vector<SmallSampleSeries> series;

    const SmallSampleSeries& get(double m_th, const DecisionRule& rule) const;
};

SmallSampleResult run_small_sample(const SmallSampleSpec& spec, const Progress& progress = {});

std::string small_sample_to_json(const SmallSampleResult& result,
                                 const std::string& extra_meta_json = "{}");

}  // namespace eqbase
