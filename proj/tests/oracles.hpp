#pragma once
// Independent reference computations used only by the tests. Nothing here
// calls into the code paths it is used to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

/// Composite 10-point Gauss-Legendre rule on `panels` equal panels.
inline double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                             int panels) {
    static constexpr double x[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                    0.8650633666889845, 0.9739065285171717};
    static constexpr double w[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                    0.1494513491505806, 0.0666713443086881};
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double mid = a + (k + 0.5) * h, half = 0.5 * h;
        double s = 0.0;
        for (int i = 0; i < 5; ++i) s += w[i] * (f(mid - half * x[i]) + f(mid + half * x[i]));
        total += s * half;
    }
    return total;
}

/// Gauss-Legendre with panel doubling until two successive estimates agree
/// to `rel_tol`.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double rel_tol) {
    double prev = gauss_legendre(f, a, b, 4);
    for (int panels = 8; panels <= (1 << 16); panels *= 2) {
        const double cur = gauss_legendre(f, a, b, panels);
        if (std::abs(cur - prev) <= rel_tol * std::abs(cur)) return cur;
        prev = cur;
    }
    return prev;
}

/// Integral of f over [0, T] after the substitution t = c (e^s - 1), which
/// flattens power-law kernels (t + c)^-p. T may be +inf, in which case the
/// s-range stops at s_max_inf.
inline double power_law_quadrature(const std::function<double(double)>& f, double c, double T,
                                   double rel_tol, double s_max_inf = 700.0) {
    const double s_max = std::isinf(T) ? s_max_inf : std::log1p(T / c);
    auto g = [&](double s) { return f(c * std::expm1(s)) * c * std::exp(s); };
    return integrate(g, 0.0, s_max, rel_tol);
}

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double F = cdf(x[i]);
        d = std::max({d, (i + 1) / n - F, F - i / n});
    }
    return d;
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

/// O(n^2) concordance probability, ties 1/2.
inline double brute_force_auc(const std::vector<std::pair<double, int>>& s) {
    double num = 0.0, den = 0.0;
    for (const auto& a : s) {
        if (a.second != 1) continue;
        for (const auto& b : s) {
            if (b.second != 0) continue;
            den += 1.0;
            if (a.first > b.first) num += 1.0;
            else if (a.first == b.first) num += 0.5;
        }
    }
    return num / den;
}

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Classical Jacobi eigenvalue iteration (largest off-diagonal pivot).
inline std::array<double, 3> jacobi_eigenvalues(Mat3 a) {
    for (int it = 0; it < 200; ++it) {
        int p = 0, q = 1;
        double big = std::abs(a[0][1]);
        if (std::abs(a[0][2]) > big) big = std::abs(a[0][2]), p = 0, q = 2;
        if (std::abs(a[1][2]) > big) big = std::abs(a[1][2]), p = 1, q = 2;
        const double scale = std::abs(a[0][0]) + std::abs(a[1][1]) + std::abs(a[2][2]) + big;
        if (big <= 1e-300 || big < 1e-17 * scale) break;
        const double phi = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
        const double c = std::cos(phi), s = std::sin(phi);
        Mat3 r{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
        r[p][p] = c;
        r[q][q] = c;
        r[p][q] = s;
        r[q][p] = -s;
        // a <- r^T a r
        Mat3 t{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) t[i][j] += a[i][k] * r[k][j];
        Mat3 out{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) out[i][j] += r[k][i] * t[k][j];
        a = out;
    }
    std::array<double, 3> e{a[0][0], a[1][1], a[2][2]};
    std::sort(e.begin(), e.end(), std::greater<>());
    return e;
}

/// Uniform random rotation from a normalized random quaternion.
template <typename Rng>
Mat3 random_rotation(Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    double w = g(rng), x = g(rng), y = g(rng), z = g(rng);
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    w /= n, x /= n, y /= n, z /= n;
    return {{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
             {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
             {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}}};
}

/// R^T S R
inline Mat3 rotate(const Mat3& s, const Mat3& r) {
    Mat3 t{}, out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) t[i][j] += s[i][k] * r[k][j];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) out[i][j] += r[k][i] * t[k][j];
    return out;
}

/// Ogata thinning for a temporal ETAS process on [0, T] with kernel
/// scale * K0 e^{alpha (m - mc)} (t + c)^-p and GR magnitudes (no truncation
/// when m_max <= mc). Returns the event count.
template <typename Rng>
std::size_t thinning_count(double mu, double K0, double alpha, double c, double p, double mc,
                           double b, double m_max, double scale, double T, Rng& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double beta = b * std::numbers::ln10;
    std::vector<std::pair<double, double>> ev;
    auto intensity = [&](double t) {
        double l = mu;
        for (const auto& [ti, mi] : ev)
            if (ti < t) l += scale * K0 * std::exp(alpha * (mi - mc)) * std::pow(t - ti + c, -p);
        return l;
    };
    double t = 0.0;
    for (;;) {
        // intensity only decays between events, so its value just after t bounds it
        const double bound = intensity(std::nextafter(t, INFINITY)) + 1e-300;
        t += -std::log(1.0 - U(rng)) / bound;
        if (t > T) break;
        if (U(rng) * bound <= intensity(t)) {
            double m;
            const double u = U(rng);
            if (m_max > mc) m = mc - std::log1p(-u * (-std::expm1(-beta * (m_max - mc)))) / beta;
            else m = mc - std::log(1.0 - u) / beta;
            ev.emplace_back(t, m);
        }
    }
    return ev.size();
}

}  // namespace oracle
