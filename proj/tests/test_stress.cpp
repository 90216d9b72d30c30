#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "eqbase/stress.hpp"
#include "oracles.hpp"

using namespace eqbase;

namespace {

StressTensor3 random_tensor(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0, 1);
    return {g(rng), g(rng), g(rng), g(rng), g(rng), g(rng)};
}

StressTensor3 rotated(const StressTensor3& s, const oracle::Mat3& r) {
    return StressTensor3::from_matrix(oracle::rotate(s.matrix(), r));
}

}  // namespace

TEST_CASE("metric_A examples") {
    CHECK(metric_A({}) == 0);
    CHECK(metric_A({0, 0, 0, 1, 0, 0}) == 1);
    CHECK(metric_A({3, 0, -1, 0, 0, 0}) == 4);
}

TEST_CASE("von Mises analytic cases") {
    for (double tau : {1.0, 2.5, -0.3, 1e6}) {
        const StressTensor3 shear{0, 0, 0, tau, 0, 0};
        CHECK(von_mises(shear) == doctest::Approx(std::sqrt(3.0) * std::abs(tau)).epsilon(1e-12));
        CHECK(max_shear(shear) == doctest::Approx(std::abs(tau)).epsilon(1e-12));
    }
    for (double sigma : {1.0, -4.0, 123.0}) {
        CHECK(von_mises({sigma, 0, 0, 0, 0, 0}) == doctest::Approx(std::abs(sigma)).epsilon(1e-12));
    }
    CHECK(von_mises({2, 2, 2, 0, 0, 0}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(von_mises({2, 2, 2, 0, 0, 0})) <= 1e-12);
}

TEST_CASE("max shear analytic cases") {
    CHECK(max_shear({3, 1, -1, 0, 0, 0}) == doctest::Approx(2.0).epsilon(1e-12));
    const auto e = principal_stresses({0, 0, 0, 2, 0, 0});
    CHECK(e[0] == doctest::Approx(2).epsilon(1e-12));
    CHECK(std::abs(e[1]) <= 1e-12);
    CHECK(e[2] == doctest::Approx(-2).epsilon(1e-12));
}

TEST_CASE("closed-form eigenvalues agree with Jacobi") {
    std::mt19937_64 rng(10);
    for (int i = 0; i < 2000; ++i) {
        const auto s = random_tensor(rng);
        const auto a = principal_stresses(s);
        const auto b = oracle::jacobi_eigenvalues(s.matrix());
        const auto c = principal_stresses_jacobi(s);
        const double scale = std::max(std::abs(b[0]), std::abs(b[2]));
        for (int k = 0; k < 3; ++k) {
            CHECK(std::abs(a[k] - b[k]) <= 1e-9 * scale);
            CHECK(std::abs(c[k] - b[k]) <= 1e-9 * scale);
        }
        CHECK(a[0] >= a[1]);
        CHECK(a[1] >= a[2]);
        CHECK(max_shear(s) == doctest::Approx((b[0] - b[2]) / 2).epsilon(1e-9));
    }
}

TEST_CASE("eigenvalues at and near repeated roots") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 500; ++i) {
        const auto r = oracle::random_rotation(rng);
        const double eps = i % 3 == 0 ? 0.0 : std::pow(10.0, -(i % 14));
        const oracle::Mat3 d{{{1.0, 0, 0}, {0, 1.0 + eps, 0}, {0, 0, -2.0}}};
        const auto s = StressTensor3::from_matrix(oracle::rotate(d, r));
        const auto a = principal_stresses(s);
        CHECK(a[0] == doctest::Approx(1.0 + eps).epsilon(1e-9));
        CHECK(a[1] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(a[2] == doctest::Approx(-2.0).epsilon(1e-9));
    }
    const auto iso = principal_stresses({5, 5, 5, 0, 0, 0});
    for (double x : iso) CHECK(x == doctest::Approx(5).epsilon(1e-12));
}

TEST_CASE("von Mises and max shear are rotation invariant") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 1000; ++i) {
        const auto s = random_tensor(rng);
        const auto t = rotated(s, oracle::random_rotation(rng));
        CHECK(std::abs(von_mises(t) - von_mises(s)) <= 1e-9 * std::max(1.0, von_mises(s)));
        CHECK(std::abs(max_shear(t) - max_shear(s)) <= 1e-9 * std::max(1.0, max_shear(s)));
    }
}

TEST_CASE("metric_A is not rotation invariant") {
    std::mt19937_64 rng(13);
    const StressTensor3 s{1, 0, 0, 0, 0, 0};
    bool witness = false;
    for (int i = 0; i < 10 && !witness; ++i)
        witness = std::abs(metric_A(rotated(s, oracle::random_rotation(rng))) - metric_A(s)) > 1e-3;
    CHECK(witness);
}

TEST_CASE("von Mises: J2 form equals the invariants form") {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 1000; ++i) {
        const auto s = random_tensor(rng);
        CHECK(von_mises_invariants(s) == doctest::Approx(von_mises(s)).epsilon(1e-12));
    }
}

TEST_CASE("deviatoric part is traceless") {
    std::mt19937_64 rng(15);
    for (int i = 0; i < 1000; ++i) {
        const auto s = random_tensor(rng).scaled(1 + i);
        CHECK(std::abs(deviatoric(s).trace()) <= 1e-12 * (1 + i));
    }
}

TEST_CASE("metrics are absolutely homogeneous") {
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> K(-5, 5);
    for (int i = 0; i < 500; ++i) {
        const auto s = random_tensor(rng);
        const double k = K(rng);
        const auto t = s.scaled(k);
        CHECK(metric_A(t) == doctest::Approx(std::abs(k) * metric_A(s)).epsilon(1e-12));
        CHECK(von_mises(t) == doctest::Approx(std::abs(k) * von_mises(s)).epsilon(1e-12));
        CHECK(max_shear(t) == doctest::Approx(std::abs(k) * max_shear(s)).epsilon(1e-10));
    }
}

TEST_CASE("von Mises lies between sqrt(3) and 2 times the max shear") {
    // vm^2 = ((s1-s2)^2 + (s2-s3)^2 + (s1-s3)^2) / 2 with s1-s3 = 2 tau fixed;
    // the middle eigenvalue moves vm between sqrt(3) tau and 2 tau
    std::mt19937_64 rng(17);
    for (int i = 0; i < 2000; ++i) {
        const auto s = random_tensor(rng);
        const auto e = oracle::jacobi_eigenvalues(s.matrix());
        const double tau = (e[0] - e[2]) / 2;
        const double vm = von_mises(s);
        CHECK(tau <= vm);
        CHECK(std::sqrt(3.0) * tau <= vm * (1 + 1e-12));
        CHECK(vm <= 2 * tau * (1 + 1e-12));
    }
    CHECK(von_mises({0, 0, 0, 1, 0, 0}) == doctest::Approx(std::sqrt(3.0) * max_shear({0, 0, 0, 1, 0, 0})));
    CHECK(von_mises({1, 0, 0, 0, 0, 0}) == doctest::Approx(2 * max_shear({1, 0, 0, 0, 0, 0})));
}

TEST_CASE("12-feature vector") {
    const auto z = feature_vector_12({});
    for (double x : z) CHECK(x == 0);
    const auto f = feature_vector_12({2, 0, 0, 0, 0, 0});
    const std::array<double, 12> expect{2, 0, 0, 0, 0, 0, -2, 0, 0, 0, 0, 0};
    CHECK(f == expect);
    const auto g = feature_vector_12({1, -2, 3, -4, 5, -6});
    // order: xx, xy, xz, yy, yz, zz
    const std::array<double, 6> head{1, 4, 5, 2, 6, 3};
    for (int k = 0; k < 6; ++k) {
        CHECK(g[k] == head[k]);
        CHECK(g[k + 6] == -g[k]);
    }
    CHECK(feature_names_12()[0] == "abs_xx");
    CHECK(feature_names_12()[1] == "abs_xy");
    CHECK(feature_names_12()[11] == "neg_abs_zz");
}

TEST_CASE("tensor and feature CSV") {
    std::vector<LabeledTensor> rows{{{1, 2, 3, 4, 5, 6}, 1}, {{-0.1, 0.2, 1e-7, 0, 0, 9}, 0}};
    std::stringstream ss;
    write_tensor_csv(ss, rows);
    const auto back = read_tensor_csv(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].tensor == rows[0].tensor);
    CHECK(back[1].tensor == rows[1].tensor);
    CHECK(back[1].label == 0);

    std::istringstream unlabeled("sxx,syy,szz,sxy,sxz,syz\n1,2,3,4,5,6\n");
    CHECK(read_tensor_csv(unlabeled)[0].label == -1);

    std::ostringstream fs;
    write_feature_csv(fs, rows);
    CHECK(fs.str().rfind("abs_xx,abs_xy,abs_xz,abs_yy,abs_yz,abs_zz,", 0) == 0);

    std::istringstream bad("a,b\n1,2\n");
    CHECK_THROWS(read_tensor_csv(bad));
}
