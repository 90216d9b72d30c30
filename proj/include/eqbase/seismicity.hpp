#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqbase/random.hpp"

namespace eqbase {

/// One earthquake: occurrence time (days), magnitude and branching generation
/// (0 = background, k = k-th generation aftershock).
struct Event {
    double t = 0.0;
    double m = 0.0;
    int generation = 0;

    bool operator==(const Event&) const = default;
};

/// Time-ordered events over a closed horizon [t_start, t_end].
struct Catalog {
    std::vector<Event> events;
    double t_start = 0.0;
    double t_end = 0.0;
    double mc = 0.0;
    /// Set when a simulation stopped at its event cap.
    bool truncated = false;

    /// Throws std::invalid_argument if the events are unsorted or outside the horizon.
    void validate() const;
    /// Events with t in [t0, t1).
    std::vector<Event> in_window(double t0, double t1) const;
};

/// Gutenberg-Richter law log10 N(>= m) = a - b m, with N counted per
/// reference window of `window_days`.
struct GrParams {
    double a = 0.0;
    double b = 1.0;
    double window_days = 1.0;
};

/// Modified Omori law K / (t + c)^p.
struct MolParams {
    double K = 0.0;
    double c = 0.01;
    double p = 1.0;
};

/// Base for GR estimation failures; trial runners catch this to apply their
/// fallback prediction.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by fit_gr when the window holds too few events for the estimator.
class InsufficientData : public FitError {
public:
    InsufficientData(std::size_t count, std::size_t required);
    std::size_t count() const noexcept { return count_; }
    std::size_t required() const noexcept { return required_; }

private:
    std::size_t count_;
    std::size_t required_;
};

/// Expected number of events with magnitude >= m_th per reference window.
double gr_rate(const GrParams& gr, double m_th);

/// Aftershock rate (events/day) t days after the mainshock. Throws on t < 0.
double mol_rate(const MolParams& mol, double t);

/// Closed-form integral of mol_rate over [0, T].
double mol_integral(const MolParams& mol, double T);

/// Exponential (GR) magnitudes above mc with rate b ln 10, optionally
/// truncated and renormalized on [mc, m_max).
std::vector<double> sample_magnitudes(double b, double mc, std::optional<double> m_max,
                                      std::size_t n, Rng& rng);

/// Single draw from the same law as sample_magnitudes.
double sample_magnitude(double b, double mc, std::optional<double> m_max, Rng& rng);

struct GrFitOptions {
    std::size_t min_events = 2;
    /// When set, b is pinned to this value and only a is estimated.
    std::optional<double> fixed_b;
};

/// Aki maximum-likelihood b-value and a-value from events in [t0, t1) with
/// m >= mc. The a-value is normalized to `target_window_days`.
GrParams fit_gr(const Catalog& catalog, double t0, double t1, double mc,
                double target_window_days, const GrFitOptions& options = {});

/// Same estimator over a bare list of magnitudes observed during `span_days`.
GrParams fit_gr(const std::vector<double>& magnitudes, double span_days, double mc,
                double target_window_days, const GrFitOptions& options = {});

/// Catalog CSV: header `t_days,magnitude,generation`, values at full precision.
void write_catalog_csv(std::ostream& os, const Catalog& catalog);
/// Parses the CSV written by write_catalog_csv. Horizon is taken from the
/// arguments since the file does not carry it.
Catalog read_catalog_csv(std::istream& is, double t_start, double t_end, double mc);

}  // namespace eqbase
