#include "eqbase/etas.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>
#include <string>

namespace eqbase {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

std::uint64_t poisson_draw(double mean, Rng& rng) {
    if (!(mean > 0.0)) return 0;
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(rng);
}

}  // namespace

void EtasParams::validate() const {
    require(std::isfinite(mu) && mu >= 0.0, "etas.mu must be finite and >= 0");
    require(std::isfinite(K0) && K0 >= 0.0, "etas.K0 must be finite and >= 0");
    require(std::isfinite(alpha), "etas.alpha must be finite");
    require(c > 0.0 && std::isfinite(c), "etas.c must be > 0");
    require(p > 1.0 && std::isfinite(p), "etas.p must be > 1");
    require(b > 0.0 && std::isfinite(b), "etas.b must be > 0");
    require(std::isfinite(mc), "etas.mc must be finite");
    require(!m_max || *m_max > mc, "etas.m_max must exceed mc");
}

double EtasParams::kernel_scale() const {
    if (kernel == OmoriKernel::Literal) return 1.0;
    return (p - 1.0) * std::pow(c, p - 1.0);
}

double EtasParams::productivity(double m) const {
    return K0 * kernel_scale() * std::exp(alpha * (m - mc));
}

void SimConfig::validate() const {
    require(horizon_days > 0.0 && std::isfinite(horizon_days), "sim.horizon_days must be > 0");
    require(max_events > 0, "sim.max_events must be > 0");
    require(a_window_days > 0.0, "sim.a_window_days must be > 0");
    for (const auto& e : forced_parents)
        require(e.t >= 0.0 && e.t <= horizon_days, "sim.forced_parents outside horizon");
}

double mu_from_a(double a, double b, double mc, double window_days) {
    if (!(window_days > 0.0)) throw std::invalid_argument("mu_from_a: window must be positive");
    return std::pow(10.0, a - b * mc) / window_days;
}

double conditional_intensity(const EtasParams& params, const std::vector<Event>& history,
                             double t) {
    double rate = params.mu;
    for (const auto& e : history) {
        if (!(e.t < t)) continue;
        rate += params.productivity(e.m) * std::pow(t - e.t + params.c, -params.p);
    }
    return rate;
}

double conditional_intensity(const EtasParams& params, const Catalog& history, double t) {
    return conditional_intensity(params, history.events, t);
}

double expected_offspring(const EtasParams& params, double m, double remaining) {
    if (remaining < 0.0) throw std::invalid_argument("expected_offspring: negative duration");
    if (params.K0 == 0.0) return 0.0;
    const double c = params.c;
    const double p = params.p;
    double integral;
    if (std::abs(p - 1.0) < 1e-12) {
        integral = std::isinf(remaining) ? std::numeric_limits<double>::infinity()
                                         : std::log1p(remaining / c);
    } else {
        const double tail = std::isinf(remaining) ? (p > 1.0 ? 0.0 : std::numeric_limits<double>::infinity())
                                                  : std::pow(remaining + c, 1.0 - p);
        integral = (std::pow(c, 1.0 - p) - tail) / (p - 1.0);
    }
    return params.productivity(m) * integral;
}

double omori_time_quantile(double c, double p, double remaining, double u) {
    if (std::abs(p - 1.0) < 1e-12) return c * std::pow(1.0 + remaining / c, u) - c;
    const double q = 1.0 - p;
    const double lo = std::pow(c, q);
    const double hi = std::pow(remaining + c, q);
    const double t = std::pow(lo - u * (lo - hi), 1.0 / q) - c;
    return std::clamp(t, 0.0, remaining);
}

double mean_productivity_factor(const EtasParams& params) {
    const double beta = params.b * std::numbers::ln10;
    const double k = beta - params.alpha;
    if (!params.m_max) {
        if (k <= 0.0) return std::numeric_limits<double>::infinity();
        return beta / k;
    }
    const double span = *params.m_max - params.mc;
    const double mass = -std::expm1(-beta * span);
    if (std::abs(k) < 1e-12) return beta * span / mass;
    return beta / k * (-std::expm1(-k * span)) / mass;
}

Catalog simulate_catalog(const EtasParams& params, const SimConfig& config) {
    params.validate();
    config.validate();

    EtasParams p = params;
    if (config.a_value) p.mu = mu_from_a(*config.a_value, p.b, p.mc, config.a_window_days);

    const double horizon = config.horizon_days;
    Catalog cat;
    cat.t_start = 0.0;
    cat.t_end = horizon;
    cat.mc = p.mc;

    Rng root(derive_seed(config.seed, {0}));
    const auto n_background = poisson_draw(p.mu * horizon, root);

    std::vector<Event> roots;
    roots.reserve(n_background + config.forced_parents.size());
    for (std::uint64_t i = 0; i < n_background; ++i) {
        const double t = uniform_open(root) * horizon;
        roots.push_back({t, sample_magnitude(p.b, p.mc, p.m_max, root), 0});
    }
    for (auto e : config.forced_parents) {
        e.generation = 0;
        roots.push_back(e);
    }

    auto& out = cat.events;
    out.reserve(std::min<std::size_t>(config.max_events, roots.size() * 4 + 16));
    std::deque<Event> queue;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (out.size() >= config.max_events) {
            cat.truncated = true;
            break;
        }
        Rng rng(derive_seed(config.seed, {1, i}));
        queue.clear();
        queue.push_back(roots[i]);
        while (!queue.empty()) {
            const Event parent = queue.front();
            queue.pop_front();
            if (out.size() >= config.max_events) {
                cat.truncated = true;
                break;
            }
            out.push_back(parent);
            const double remaining = horizon - parent.t;
            const auto kids = poisson_draw(expected_offspring(p, parent.m, remaining), rng);
            for (std::uint64_t k = 0; k < kids; ++k) {
                const double dt = omori_time_quantile(p.c, p.p, remaining, uniform_open(rng));
                const double m = sample_magnitude(p.b, p.mc, p.m_max, rng);
                queue.push_back({std::min(parent.t + dt, horizon), m, parent.generation + 1});
            }
        }
        if (cat.truncated) break;
    }

    std::stable_sort(out.begin(), out.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    return cat;
}

}  // namespace eqbase
