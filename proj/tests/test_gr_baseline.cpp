#include <cmath>
#include <vector>

#include "doctest.h"
#include "eqbase/gr_baseline.hpp"
#include "eqbase/skill.hpp"

using namespace eqbase;

namespace {
EtasParams normalized() {
    EtasParams p;
    p.kernel = OmoriKernel::Normalized;
    return p;
}
}  // namespace

TEST_CASE("predicted_rate examples") {
    CHECK(predicted_rate({5, 1, 400}, 4, 5) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(predicted_rate({6, 1, 100}, 1, 6) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(predicted_rate({4, 1, 900}, 9, 7) == doctest::Approx(1e-3 / 9).epsilon(1e-13));
}

TEST_CASE("binarize examples") {
    const auto half = DecisionRule::poisson_half();
    CHECK(binarize(0.0, half) == 0);
    CHECK(binarize(std::log(2.0), half) == 1);
    CHECK(binarize(std::nextafter(std::log(2.0), 0.0), half) == 0);
    CHECK(binarize(0.25, half) == 0);
    CHECK(binarize(0.25, DecisionRule::rate_at_least(0.2)) == 1);
    CHECK(binarize(0.5, DecisionRule::rate_at_least(0.5)) == 1);
    CHECK(binarize(0.0, DecisionRule::always()) == 1);
}

TEST_CASE("decision rule names round trip") {
    for (const auto& r : {DecisionRule::poisson_half(), DecisionRule::rate_at_least(0.5),
                          DecisionRule::rate_at_least(1.0), DecisionRule::always()}) {
        CHECK(DecisionRule::parse(r.name()) == r);
    }
    CHECK(DecisionRule::poisson_half().name() == "poisson-half");
    CHECK(DecisionRule::rate_at_least(0.5).name() == "rate-ge-0.5");
    CHECK_THROWS_AS(DecisionRule::parse("coin-flip"), std::invalid_argument);
}

TEST_CASE("true_label examples") {
    Catalog c;
    c.t_end = 200;
    c.mc = 3;
    CHECK(true_label(c, 100, 200, 5) == 0);
    c.events = {{150, 5.0, 0}};
    CHECK(true_label(c, 100, 200, 5) == 1);
    c.events.clear();
    for (int i = 0; i < 50; ++i) c.events.push_back({100.0 + i, 4.99, 0});
    CHECK(true_label(c, 100, 200, 5) == 0);
    c.events = {{99.999, 7, 0}, {200, 5.5, 0}};
    CHECK(true_label(c, 100, 200, 5) == 1);  // right end is closed
    c.events = {{99.999, 7, 0}};
    CHECK(true_label(c, 100, 200, 5) == 0);
}

TEST_CASE("run_trial with a strong Poisson background") {
    EtasParams p = normalized();
    p.K0 = 0;
    p.mu = 10.0;  // a = 6: 100 events >= 4 expected per window
    const TrialSpec spec{100, 1, 4.0};
    int agree = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto r = run_trial(p, spec, DecisionRule::poisson_half(), seed);
        agree += (r.predicted_label == 1 && r.true_label == 1);
    }
    CHECK(agree >= 95);
}

TEST_CASE("run_trial with a weak background rarely sees m7") {
    EtasParams p = normalized();
    p.mu = mu_from_a(4, 1, 3, 100);
    const TrialSpec spec{100, 1, 7.0};
    int both_zero = 0;
    const int N = 400;
    for (std::uint64_t seed = 0; seed < N; ++seed) {
        const auto r = run_trial(p, spec, DecisionRule::poisson_half(), seed);
        both_zero += (r.predicted_label == 0 && r.true_label == 0);
    }
    CHECK(both_zero >= 0.97 * N);
}

TEST_CASE("run_trial is deterministic per seed") {
    EtasParams p = normalized();
    p.mu = mu_from_a(5.3, 1, 3, 100);
    const TrialSpec spec{100, 4, 5.0};
    for (std::uint64_t seed : {1u, 77u, 12345u}) {
        CHECK(run_trial(p, spec, DecisionRule::poisson_half(), seed) ==
              run_trial(p, spec, DecisionRule::poisson_half(), seed));
    }
}

TEST_CASE("fit failure falls back to the configured label") {
    EtasParams p = normalized();
    p.mu = 0;
    p.K0 = 0;
    const TrialSpec spec{100, 1, 5.0};
    TrialOptions o;
    auto r = run_trial(p, spec, DecisionRule::poisson_half(), 1, o);
    CHECK(r.fit_failed);
    CHECK(r.predicted_label == 0);
    o.fallback_label = 1;
    r = run_trial(p, spec, DecisionRule::poisson_half(), 1, o);
    CHECK(r.fit_failed);
    CHECK(r.predicted_label == 1);
}

TEST_CASE("doubling training count and length keeps the per-window rate") {
    Rng rng(6);
    for (int rep = 0; rep < 20; ++rep) {
        const auto m = sample_magnitudes(1, 3, 8.0, 20 + rep * 13, rng);
        std::vector<double> twice = m;
        twice.insert(twice.end(), m.begin(), m.end());
        const auto g1 = fit_gr(m, 100, 3, 100);
        const auto g2 = fit_gr(twice, 200, 3, 100);
        CHECK(g2.a == doctest::Approx(g1.a).epsilon(1e-9));
        CHECK(predicted_rate({g1.a, g1.b, 100}, 1, 5) ==
              doctest::Approx(predicted_rate({g2.a, g2.b, 100}, 1, 5)).epsilon(1e-9));
    }
}

TEST_CASE("forecast label is non-increasing in m_th") {
    Rng rng(8);
    std::uniform_real_distribution<double> A(3, 8), B(0.5, 1.5);
    const std::vector<DecisionRule> rules{DecisionRule::poisson_half(),
                                          DecisionRule::rate_at_least(0.5),
                                          DecisionRule::rate_at_least(1.0)};
    for (int rep = 0; rep < 500; ++rep) {
        const GrParams g{A(rng), B(rng), 100};
        for (int n : {1, 4, 9}) {
            for (const auto& rule : rules) {
                int prev = 1;
                for (double m = 3; m <= 8; m += 0.1) {
                    const int label = binarize(predicted_rate(g, n, m), rule);
                    CHECK(label <= prev);
                    prev = label;
                }
            }
        }
    }
}

TEST_CASE("always-positive rule has TPR 1 on batches with positives") {
    EtasParams p = normalized();
    const TrialSpec spec{100, 4, 5.0};
    ConfusionCounts counts;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        p.mu = mu_from_a(4 + 2 * (seed % 7) / 6.0, 1, 3, 100);
        const auto r = run_trial(p, spec, DecisionRule::always(), seed);
        counts.add(r.predicted_label, r.true_label);
    }
    REQUIRE(counts.positives() > 0);
    CHECK(*skill(counts).tpr == 1.0);
}

TEST_CASE("trial spec validation") {
    CHECK_THROWS(TrialSpec{100, 0, 5}.validate());
    CHECK_THROWS(TrialSpec{0, 1, 5}.validate());
    CHECK(TrialSpec{100, 4, 5}.t0() == 400);
    CHECK(TrialSpec{100, 4, 5}.horizon() == 500);
}
