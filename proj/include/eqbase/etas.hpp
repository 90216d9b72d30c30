#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "eqbase/seismicity.hpp"

namespace eqbase {

/// How the Omori time kernel of each parent is scaled.
///
/// Literal:    K0 e^{alpha (m - mc)} (t + c)^{-p}
/// Normalized: K0 e^{alpha (m - mc)} (p - 1) c^{p-1} (t + c)^{-p}, so K0 is the
///             expected number of direct offspring of an mc event over all time.
enum class OmoriKernel { Literal, Normalized };

/// Temporal ETAS parameters. Defaults are alpha = 2.04, K0 = 0.08,
/// c = 0.011 d, p = 1.08, mc = 3, b = 1, magnitudes truncated at 8.
struct EtasParams {
    double mu = 0.0;  ///< background rate of events >= mc, per day
    double K0 = 0.08;
    double alpha = 2.04;  ///< natural-log basis
    double c = 0.011;
    double p = 1.08;
    double mc = 3.0;
    double b = 1.0;
    std::optional<double> m_max = 8.0;
    OmoriKernel kernel = OmoriKernel::Literal;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    /// Multiplier applied to K0 e^{alpha(m-mc)} (t+c)^{-p}.
    double kernel_scale() const;
    /// Productivity e^{alpha(m - mc)} K0 kernel_scale().
    double productivity(double m) const;
};

struct SimConfig {
    double horizon_days = 100.0;
    std::uint64_t seed = 0;
    std::size_t max_events = 1'000'000;
    /// When set, overrides params.mu with mu_from_a(a_value, b, mc, a_window_days).
    std::optional<double> a_value;
    double a_window_days = 100.0;
    /// Events injected at generation 0 in addition to the background.
    std::vector<Event> forced_parents;

    void validate() const;
};

/// Background rate per day such that 10^(a - b mc) events >= mc occur per window.
double mu_from_a(double a, double b, double mc, double window_days);

/// ETAS conditional intensity at t from events strictly earlier than t.
double conditional_intensity(const EtasParams& params, const std::vector<Event>& history,
                             double t);
double conditional_intensity(const EtasParams& params, const Catalog& history, double t);

/// Expected direct offspring (>= mc) of a magnitude-m parent within the next
/// `remaining` days. `remaining` may be +inf when p > 1.
double expected_offspring(const EtasParams& params, double m, double remaining);

/// Inverse CDF of the (t + c)^{-p} density truncated to [0, remaining].
double omori_time_quantile(double c, double p, double remaining, double u);

/// Mean of e^{alpha (m - mc)} over the magnitude distribution of `params`.
double mean_productivity_factor(const EtasParams& params);

/// Branching simulation of a temporal ETAS catalog on [0, horizon_days].
/// Each generation-0 event (background or forced) grows its cluster from its
/// own seeded stream, so the result depends only on (params, config).
Catalog simulate_catalog(const EtasParams& params, const SimConfig& config);

}  // namespace eqbase
