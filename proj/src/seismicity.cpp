#include "eqbase/seismicity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace eqbase {

namespace {

constexpr double kLog10E = std::numbers::log10e;

}  // namespace

void Catalog::validate() const {
    if (t_end < t_start) throw std::invalid_argument("catalog horizon is reversed");
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (e.t < t_start || e.t > t_end)
            throw std::invalid_argument("event " + std::to_string(i) + " outside catalog horizon");
        if (i > 0 && e.t < events[i - 1].t)
            throw std::invalid_argument("catalog events not sorted at index " + std::to_string(i));
    }
}

std::vector<Event> Catalog::in_window(double t0, double t1) const {
    auto lo = std::lower_bound(events.begin(), events.end(), t0,
                               [](const Event& e, double t) { return e.t < t; });
    auto hi = std::lower_bound(lo, events.end(), t1,
                               [](const Event& e, double t) { return e.t < t; });
    return {lo, hi};
}

InsufficientData::InsufficientData(std::size_t count, std::size_t required)
    : FitError("insufficient data for GR fit: " + std::to_string(count) + " events, need " +
               std::to_string(required)),
      count_(count),
      required_(required) {}

double gr_rate(const GrParams& gr, double m_th) { return std::pow(10.0, gr.a - gr.b * m_th); }

double mol_rate(const MolParams& mol, double t) {
    if (t < 0.0) throw std::invalid_argument("mol_rate: negative time");
    return mol.K * std::pow(t + mol.c, -mol.p);
}

double mol_integral(const MolParams& mol, double T) {
    if (T < 0.0) throw std::invalid_argument("mol_integral: negative duration");
    if (std::abs(mol.p - 1.0) < 1e-12) return mol.K * std::log1p(T / mol.c);
    const double q = 1.0 - mol.p;
    return mol.K * (std::pow(mol.c, q) - std::pow(T + mol.c, q)) / (mol.p - 1.0);
}

double sample_magnitude(double b, double mc, std::optional<double> m_max, Rng& rng) {
    const double beta = b * std::numbers::ln10;
    const double u = uniform_open(rng);
    if (!m_max) return mc - std::log(u) / beta;
    // inverse of F(m) = (1 - e^{-beta(m-mc)}) / (1 - e^{-beta(mmax-mc)})
    const double mass = -std::expm1(-beta * (*m_max - mc));
    return mc - std::log1p(-u * mass) / beta;
}

std::vector<double> sample_magnitudes(double b, double mc, std::optional<double> m_max,
                                      std::size_t n, Rng& rng) {
    if (!(b > 0.0)) throw std::invalid_argument("sample_magnitudes: b must be positive");
    if (m_max && !(*m_max > mc))
        throw std::invalid_argument("sample_magnitudes: m_max must exceed mc");
    std::vector<double> out(n);
    for (auto& m : out) m = sample_magnitude(b, mc, m_max, rng);
    return out;
}

GrParams fit_gr(const std::vector<double>& magnitudes, double span_days, double mc,
                double target_window_days, const GrFitOptions& options) {
    if (!(span_days > 0.0) || !(target_window_days > 0.0))
        throw std::invalid_argument("fit_gr: window lengths must be positive");
    std::size_t count = 0;
    double excess = 0.0;
    for (double m : magnitudes) {
        if (m < mc) continue;
        ++count;
        excess += m - mc;
    }
    if (count < options.min_events || count == 0)
        throw InsufficientData(count, std::max<std::size_t>(options.min_events, 1));

    double b;
    if (options.fixed_b) {
        b = *options.fixed_b;
    } else {
        const double mean_excess = excess / static_cast<double>(count);
        if (!(mean_excess > 0.0)) throw FitError("GR fit degenerate: all magnitudes equal mc");
        b = kLog10E / mean_excess;
    }
    const double scaled = static_cast<double>(count) * target_window_days / span_days;
    return {std::log10(scaled) + b * mc, b, target_window_days};
}

GrParams fit_gr(const Catalog& catalog, double t0, double t1, double mc,
                double target_window_days, const GrFitOptions& options) {
    if (t0 < catalog.t_start || t1 > catalog.t_end || !(t1 > t0))
        throw std::invalid_argument("fit_gr: window outside catalog horizon");
    std::vector<double> mags;
    for (const auto& e : catalog.in_window(t0, t1)) mags.push_back(e.m);
    return fit_gr(mags, t1 - t0, mc, target_window_days, options);
}

void write_catalog_csv(std::ostream& os, const Catalog& catalog) {
    os << "t_days,magnitude,generation\n";
    char buf[96];
    for (const auto& e : catalog.events) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", e.t, e.m, e.generation);
        os << buf;
    }
}

Catalog read_catalog_csv(std::istream& is, double t_start, double t_end, double mc) {
    Catalog cat;
    cat.t_start = t_start;
    cat.t_end = t_end;
    cat.mc = mc;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("catalog CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t_days,magnitude,generation")
        throw std::runtime_error("catalog CSV: unexpected header '" + line + "'");
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::istringstream ss(line);
        Event e;
        char c1 = 0, c2 = 0;
        if (!(ss >> e.t >> c1 >> e.m >> c2 >> e.generation) || c1 != ',' || c2 != ',')
            throw std::runtime_error("catalog CSV: malformed row " + std::to_string(row));
        cat.events.push_back(e);
    }
    cat.validate();
    return cat;
}

}  // namespace eqbase
