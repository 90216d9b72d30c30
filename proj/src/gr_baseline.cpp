#include "eqbase/gr_baseline.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace eqbase {

std::string DecisionRule::name() const {
    switch (kind) {
        case Kind::PoissonHalf: return "poisson-half";
        case Kind::Always: return "always";
        case Kind::RateAtLeast: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "rate-ge-%g", threshold);
            return buf;
        }
    }
    return "?";
}

DecisionRule DecisionRule::parse(const std::string& text) {
    if (text == "poisson-half") return poisson_half();
    if (text == "always") return always();
    const std::string prefix = "rate-ge-";
    if (text.rfind(prefix, 0) == 0) {
        const std::string num = text.substr(prefix.size());
        std::size_t used = 0;
        double theta = 0.0;
        try {
            theta = std::stod(num, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == num.size() && used > 0 && theta >= 0.0) return rate_at_least(theta);
    }
    throw std::invalid_argument("unknown decision rule '" + text + "'");
}

void TrialSpec::validate() const {
    if (!(delta_days > 0.0)) throw std::invalid_argument("trial.delta_days must be > 0");
    if (n < 1) throw std::invalid_argument("trial.n must be >= 1");
    if (!std::isfinite(m_th)) throw std::invalid_argument("trial.m_th must be finite");
}

double predicted_rate(const GrParams& trained, int n, double m_th) {
    if (n < 1) throw std::invalid_argument("predicted_rate: n must be >= 1");
    return gr_rate(trained, m_th) / static_cast<double>(n);
}

int binarize(double rate, const DecisionRule& rule) {
    if (rate < 0.0) throw std::invalid_argument("binarize: negative rate");
    switch (rule.kind) {
        case DecisionRule::Kind::PoissonHalf: return rate >= std::numbers::ln2 ? 1 : 0;
        case DecisionRule::Kind::RateAtLeast: return rate >= rule.threshold ? 1 : 0;
        case DecisionRule::Kind::Always: return 1;
    }
    return 0;
}

int true_label(const Catalog& catalog, double t0, double t1, double m_th) {
    // closed on the right: [t0, t1]
    for (const auto& e : catalog.in_window(t0, std::nextafter(t1, INFINITY)))
        if (e.m >= m_th) return 1;
    return 0;
}

int forecast_label(const TrialOutcome& outcome, const DecisionRule& rule,
                   const TrialOptions& options) {
    if (outcome.fit_failed) return options.fallback_label;
    return binarize(outcome.predicted_rate, rule);
}

TrialOutcome evaluate_trial(const EtasParams& params, const TrialSpec& spec, std::uint64_t seed,
                            const TrialOptions& options) {
    spec.validate();
    SimConfig sim;
    sim.horizon_days = spec.horizon();
    sim.seed = seed;
    sim.max_events = options.max_events;
    const Catalog cat = simulate_catalog(params, sim);

    TrialOutcome out;
    out.truncated = cat.truncated;
    out.n_events = cat.events.size();
    out.true_label = true_label(cat, spec.t0(), spec.horizon(), spec.m_th);
    try {
        const GrParams trained = fit_gr(cat, 0.0, spec.t0(), params.mc, spec.t0(), options.fit);
        out.predicted_rate = predicted_rate(trained, spec.n, spec.m_th);
    } catch (const FitError&) {
        out.fit_failed = true;
        out.predicted_rate = 0.0;
    }
    return out;
}

TrialResult run_trial(const EtasParams& params, const TrialSpec& spec, const DecisionRule& rule,
                      std::uint64_t seed, const TrialOptions& options) {
    const TrialOutcome o = evaluate_trial(params, spec, seed, options);
    return {o.predicted_rate, forecast_label(o, rule, options), o.true_label, o.fit_failed};
}

}  // namespace eqbase
