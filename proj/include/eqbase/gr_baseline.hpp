#pragma once

#include <cstdint>
#include <string>

#include "eqbase/etas.hpp"
#include "eqbase/seismicity.hpp"

namespace eqbase {

/// Turns an expected event count into a binary forecast.
struct DecisionRule {
    enum class Kind {
        PoissonHalf,  ///< 1 iff P(at least one event) = 1 - e^{-rate} >= 1/2
        RateAtLeast,  ///< 1 iff rate >= threshold
        Always,       ///< constant 1 (sanity harness)
    };

    Kind kind = Kind::PoissonHalf;
    double threshold = 0.0;

    static DecisionRule poisson_half() { return {Kind::PoissonHalf, 0.0}; }
    static DecisionRule rate_at_least(double theta) { return {Kind::RateAtLeast, theta}; }
    static DecisionRule always() { return {Kind::Always, 0.0}; }

    /// "poisson-half", "rate-ge-<theta>" or "always".
    std::string name() const;
    /// Inverse of name(); throws std::invalid_argument on unknown input.
    static DecisionRule parse(const std::string& text);

    bool operator==(const DecisionRule&) const = default;
};

/// One train/predict split on a simulated catalog covering [0, (n+1) delta]:
/// training window [0, n delta), prediction window [n delta, (n+1) delta].
struct TrialSpec {
    double delta_days = 100.0;
    int n = 1;
    double m_th = 5.0;

    void validate() const;
    double t0() const { return n * delta_days; }
    double horizon() const { return (n + 1) * delta_days; }
};

struct TrialOptions {
    GrFitOptions fit;
    /// Forecast issued when the training window cannot be fitted.
    int fallback_label = 0;
    std::size_t max_events = 1'000'000;
};

/// Rule-independent part of a trial; the grid binarizes it once per rule.
struct TrialOutcome {
    double predicted_rate = 0.0;
    int true_label = 0;
    bool fit_failed = false;
    bool truncated = false;
    std::size_t n_events = 0;
};

struct TrialResult {
    double predicted_rate = 0.0;
    int predicted_label = 0;
    int true_label = 0;
    bool fit_failed = false;

    bool operator==(const TrialResult&) const = default;
};

/// Expected count >= m_th over one prediction window: 10^(a - b m_th) / n,
/// with `trained` normalized to the n delta training window.
double predicted_rate(const GrParams& trained, int n, double m_th);

int binarize(double rate, const DecisionRule& rule);

/// 1 iff some event in [t0, t1] has m >= m_th.
int true_label(const Catalog& catalog, double t0, double t1, double m_th);

/// Label an outcome under a rule, honouring the fit-failure fallback.
int forecast_label(const TrialOutcome& outcome, const DecisionRule& rule,
                   const TrialOptions& options);

/// Simulate, train on the first n windows and score the last one.
TrialOutcome evaluate_trial(const EtasParams& params, const TrialSpec& spec, std::uint64_t seed,
                            const TrialOptions& options = {});

TrialResult run_trial(const EtasParams& params, const TrialSpec& spec, const DecisionRule& rule,
                      std::uint64_t seed, const TrialOptions& options = {});

}  // namespace eqbase
