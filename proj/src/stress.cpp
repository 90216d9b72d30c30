#include "eqbase/stress.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace eqbase {

StressTensor3::Matrix StressTensor3::matrix() const {
    return {{{xx, xy, xz}, {xy, yy, yz}, {xz, yz, zz}}};
}

StressTensor3 StressTensor3::from_matrix(const Matrix& m) {
    return {m[0][0], m[1][1], m[2][2], 0.5 * (m[0][1] + m[1][0]), 0.5 * (m[0][2] + m[2][0]),
            0.5 * (m[1][2] + m[2][1])};
}

double metric_A(const StressTensor3& s) {
    return std::abs(s.xx) + std::abs(s.yy) + std::abs(s.zz) + std::abs(s.xy) + std::abs(s.xz) +
           std::abs(s.yz);
}

StressTensor3 deviatoric(const StressTensor3& s) {
    const double mean = s.trace() / 3.0;
    return {s.xx - mean, s.yy - mean, s.zz - mean, s.xy, s.xz, s.yz};
}

double von_mises(const StressTensor3& s) {
    const auto d = deviatoric(s);
    const double j2 = 0.5 * (d.xx * d.xx + d.yy * d.yy + d.zz * d.zz) + d.xy * d.xy +
                      d.xz * d.xz + d.yz * d.yz;
    return std::sqrt(3.0 * j2);
}

double von_mises_invariants(const StressTensor3& s) {
    const auto d = deviatoric(s);
    const double i1 = d.trace();
    const double i2 = d.xx * d.yy + d.yy * d.zz + d.xx * d.zz - d.xy * d.xy - d.xz * d.xz -
                      d.yz * d.yz;
    return std::sqrt(std::max(0.0, i1 * i1 - 3.0 * i2));
}

namespace {

std::array<double, 3> sorted_desc(std::array<double, 3> e) {
    std::sort(e.begin(), e.end(), std::greater<>());
    return e;
}

// Below this value of 1 - r^2 the arccos step loses accuracy.
constexpr double kDegenerateDiscriminant = 1e-12;

}  // namespace

std::array<double, 3> principal_stresses_jacobi(const StressTensor3& s) {
    auto a = s.matrix();
    const double scale = metric_A(s);
    if (scale == 0.0) return {0.0, 0.0, 0.0};
    for (int sweep = 0; sweep < 64; ++sweep) {
        const double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off <= 1e-18 * scale) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = std::copysign(1.0, theta) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p];
                    const double akq = a[k][q];
                    a[k][p] = c * akp - sn * akq;
                    a[k][q] = sn * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k];
                    const double aqk = a[q][k];
                    a[p][k] = c * apk - sn * aqk;
                    a[q][k] = sn * apk + c * aqk;
                }
            }
        }
    }
    return sorted_desc({a[0][0], a[1][1], a[2][2]});
}

std::array<double, 3> principal_stresses(const StressTensor3& s) {
    const double q = s.trace() / 3.0;
    const double off = s.xy * s.xy + s.xz * s.xz + s.yz * s.yz;
    const double dxx = s.xx - q;
    const double dyy = s.yy - q;
    const double dzz = s.zz - q;
    const double p2 = dxx * dxx + dyy * dyy + dzz * dzz + 2.0 * off;
    if (p2 == 0.0) return {q, q, q};
    const double p = std::sqrt(p2 / 6.0);

    // B = (S - qI) / p, r = det(B) / 2
    const double bxx = dxx / p, byy = dyy / p, bzz = dzz / p;
    const double bxy = s.xy / p, bxz = s.xz / p, byz = s.yz / p;
    const double det = bxx * (byy * bzz - byz * byz) - bxy * (bxy * bzz - byz * bxz) +
                       bxz * (bxy * byz - byy * bxz);
    const double r = std::clamp(0.5 * det, -1.0, 1.0);
    if (1.0 - r * r < kDegenerateDiscriminant) return principal_stresses_jacobi(s);

    const double phi = std::acos(r) / 3.0;
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    const double e2 = 3.0 * q - e1 - e3;
    return sorted_desc({e1, e2, e3});
}

double max_shear(const StressTensor3& s) {
    const auto e = principal_stresses(s);
    return 0.5 * (e[0] - e[2]);
}

std::array<double, 12> feature_vector_12(const StressTensor3& s) {
    const std::array<double, 6> mag{std::abs(s.xx), std::abs(s.xy), std::abs(s.xz),
                                    std::abs(s.yy), std::abs(s.yz), std::abs(s.zz)};
    std::array<double, 12> f{};
    for (std::size_t k = 0; k < 6; ++k) {
        f[k] = mag[k];
        f[k + 6] = 0.0 - mag[k];  // +0 rather than -0 for zero components
    }
    return f;
}

const std::array<std::string, 12>& feature_names_12() {
    static const std::array<std::string, 12> names{
        "abs_xx", "abs_xy", "abs_xz", "abs_yy", "abs_yz", "abs_zz",
        "neg_abs_xx", "neg_abs_xy", "neg_abs_xz", "neg_abs_yy", "neg_abs_yz", "neg_abs_zz"};
    return names;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& text, std::size_t row) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v))
        throw std::runtime_error("tensor CSV: bad number '" + text + "' on row " +
                                 std::to_string(row));
    return v;
}

}  // namespace

std::vector<LabeledTensor> read_tensor_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("tensor CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool with_label;
    if (line == "sxx,syy,szz,sxy,sxz,syz") with_label = false;
    else if (line == "sxx,syy,szz,sxy,sxz,syz,label") with_label = true;
    else throw std::runtime_error("tensor CSV: unexpected header '" + line + "'");

    std::vector<LabeledTensor> rows;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != (with_label ? 7u : 6u))
            throw std::runtime_error("tensor CSV: wrong column count on row " + std::to_string(row));
        LabeledTensor t;
        t.tensor = {parse_number(cells[0], row), parse_number(cells[1], row),
                    parse_number(cells[2], row), parse_number(cells[3], row),
                    parse_number(cells[4], row), parse_number(cells[5], row)};
        if (with_label) {
            const double l = parse_number(cells[6], row);
            if (l != 0.0 && l != 1.0)
                throw std::runtime_error("tensor CSV: label must be 0 or 1 on row " + std::to_string(row));
            t.label = static_cast<int>(l);
        }
        rows.push_back(t);
    }
    return rows;
}

void write_tensor_csv(std::ostream& os, const std::vector<LabeledTensor>& rows) {
    const bool with_label = !rows.empty() && rows.front().label >= 0;
    os << "sxx,syy,szz,sxy,sxz,syz" << (with_label ? ",label" : "") << '\n';
    char buf[64];
    for (const auto& r : rows) {
        const auto& s = r.tensor;
        for (double v : {s.xx, s.yy, s.zz, s.xy, s.xz}) {
            std::snprintf(buf, sizeof buf, "%.17g,", v);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g", s.yz);
        os << buf;
        if (with_label) os << ',' << r.label;
        os << '\n';
    }
}

void write_feature_csv(std::ostream& os, const std::vector<LabeledTensor>& rows) {
    for (const auto& name : feature_names_12()) os << name << ',';
    os << "label\n";
    char buf[64];
    for (const auto& r : rows) {
        for (double v : feature_vector_12(r.tensor)) {
            std::snprintf(buf, sizeof buf, "%.17g,", v);
            os << buf;
        }
        os << r.label << '\n';
    }
}

}  // namespace eqbase
