#include "eqbase/aftershock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "eqbase/random.hpp"

namespace eqbase {

namespace {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

void RuptureGeom::validate() const {
    if (!(length_km > 0.0) || !(width_km > 0.0))
        throw std::invalid_argument("rupture length and width must be > 0");
    if (!(slip_m > 0.0)) throw std::invalid_argument("rupture slip must be > 0");
}

Vec3 RuptureGeom::strike_dir() const {
    const double s = deg2rad(strike_deg);
    return {std::sin(s), std::cos(s), 0.0};
}

Vec3 RuptureGeom::dip_dir() const {
    const double s = deg2rad(strike_deg);
    const double d = deg2rad(dip_deg);
    return {std::cos(s) * std::cos(d), -std::sin(s) * std::cos(d), -std::sin(d)};
}

Vec3 RuptureGeom::normal() const { return cross(strike_dir(), dip_dir()); }

double distance_to_rupture(const Vec3& point, const RuptureGeom& geom) {
    geom.validate();
    const Vec3 rel = sub(point, geom.center);
    const double u = dot(rel, geom.strike_dir());
    const double v = dot(rel, geom.dip_dir());
    const double w = dot(rel, geom.normal());
    const double du = std::max(0.0, std::abs(u) - 0.5 * geom.length_km);
    const double dv = std::max(0.0, std::abs(v) - 0.5 * geom.width_km);
    return std::sqrt(du * du + dv * dv + w * w);
}

void CellGridSpec::validate() const {
    if (!(spacing_km > 0.0)) throw std::invalid_argument("grid spacing must be > 0");
    if (half_extent_km < 0.0 || half_depth_km < 0.0)
        throw std::invalid_argument("grid extents must be >= 0");
    if (!(min_distance_km > 0.0)) throw std::invalid_argument("grid min distance must be > 0");
}

StressTensor3 synthetic_stress(const Vec3& point, const RuptureGeom& geom, double scale,
                               double min_distance_km) {
    const Vec3 s = geom.strike_dir();
    const Vec3 n = geom.normal();
    // nearest point on the rupture
    const Vec3 rel = sub(point, geom.center);
    const double u = std::clamp(dot(rel, s), -0.5 * geom.length_km, 0.5 * geom.length_km);
    const Vec3 dd = geom.dip_dir();
    const double v = std::clamp(dot(rel, dd), -0.5 * geom.width_km, 0.5 * geom.width_km);
    Vec3 e = sub(rel, {u * s[0] + v * dd[0], u * s[1] + v * dd[1], u * s[2] + v * dd[2]});
    const double r = std::max(std::sqrt(dot(e, e)), min_distance_km);
    const double len = std::sqrt(dot(e, e));
    if (len > 0.0) e = {e[0] / len, e[1] / len, e[2] / len};
    else e = n;

    // double couple M = s n^T + n s^T, modulated by the radial direction
    const double amp = scale * geom.slip_m * geom.length_km * geom.width_km / (r * r * r);
    const double ese = 2.0 * dot(e, s) * dot(e, n);
    StressTensor3::Matrix m{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            m[i][j] = amp * (s[i] * n[j] + n[i] * s[j] - 1.5 * ese * e[i] * e[j]);
    return StressTensor3::from_matrix(m);
}

std::vector<CellSample> synth_grid(const RuptureGeom& geom, const CellGridSpec& spec,
                                   const LogisticModel& truth, std::uint64_t seed) {
    geom.validate();
    spec.validate();
    to_power_law(truth);  // layout check

    const auto steps = [&](double half) { return static_cast<long>(std::floor(half / spec.spacing_km + 1e-9)); };
    const long nx = steps(spec.half_extent_km);
    const long nz = steps(spec.half_depth_km);

    Rng rng(derive_seed(seed, {7}));
    std::vector<CellSample> cells;
    cells.reserve(static_cast<std::size_t>((2 * nx + 1) * (2 * nx + 1) * (2 * nz + 1)));
    for (long i = -nx; i <= nx; ++i) {
        for (long j = -nx; j <= nx; ++j) {
            for (long k = -nz; k <= nz; ++k) {
                CellSample c;
                c.center = {geom.center[0] + i * spec.spacing_km, geom.center[1] + j * spec.spacing_km,
                            geom.center[2] + k * spec.spacing_km};
                c.r_km = std::max(distance_to_rupture(c.center, geom), spec.min_distance_km);
                c.d_m = geom.slip_m;
                if (spec.with_stress)
                    c.stress = synthetic_stress(c.center, geom, spec.stress_scale, spec.min_distance_km);
                const double x[2] = {c.r_km, c.d_m};
                c.label = uniform_open(rng) < truth.predict_prob(x) ? 1 : 0;
                cells.push_back(c);
            }
        }
    }
    if (cells.empty()) throw std::invalid_argument("synth_grid: grid has no cells");
    return cells;
}

std::string to_string(FeatureSet f) {
    switch (f) {
        case FeatureSet::DistanceSlip: return "rd";
        case FeatureSet::StressA: return "A";
        case FeatureSet::Stress12: return "stress12";
        case FeatureSet::VonMises: return "vonmises";
        case FeatureSet::MaxShear: return "maxshear";
    }
    return "?";
}

FeatureSet parse_feature_set(const std::string& text) {
    for (auto f : {FeatureSet::DistanceSlip, FeatureSet::StressA, FeatureSet::Stress12,
                   FeatureSet::VonMises, FeatureSet::MaxShear})
        if (to_string(f) == text) return f;
    throw std::invalid_argument("unknown feature set '" + text + "'");
}

std::vector<FeatureSpec> feature_spec(FeatureSet f) {
    switch (f) {
        case FeatureSet::DistanceSlip: return {{"r_km", Transform::NegLog}, {"d_m", Transform::Log}};
        case FeatureSet::StressA: return {{"A", Transform::Raw}};
        case FeatureSet::VonMises: return {{"von_mises", Transform::Raw}};
        case FeatureSet::MaxShear: return {{"max_shear", Transform::Raw}};
        case FeatureSet::Stress12: {
            std::vector<FeatureSpec> out;
            for (const auto& n : feature_names_12()) out.push_back({n, Transform::Raw});
            return out;
        }
    }
    return {};
}

namespace {

std::vector<double> stress_row(const StressTensor3& s, FeatureSet f) {
    switch (f) {
        case FeatureSet::StressA: return {metric_A(s)};
        case FeatureSet::VonMises: return {von_mises(s)};
        case FeatureSet::MaxShear: return {max_shear(s)};
        case FeatureSet::Stress12: {
            const auto v = feature_vector_12(s);
            return {v.begin(), v.end()};
        }
        case FeatureSet::DistanceSlip: break;
    }
    throw std::logic_error("stress_row: not a stress feature set");
}

}  // namespace

Dataset make_dataset(std::span<const CellSample> cells, FeatureSet f) {
    Dataset data;
    data.spec = feature_spec(f);
    for (const auto& c : cells) {
        if (f == FeatureSet::DistanceSlip) {
            const double x[2] = {c.r_km, c.d_m};
            data.push_back(x, c.label);
        } else {
            if (!c.stress) throw std::invalid_argument("make_dataset: cell has no stress tensor");
            data.push_back(stress_row(*c.stress, f), c.label);
        }
    }
    return data;
}

void write_cells_csv(std::ostream& os, std::span<const CellSample> cells) {
    os << "r_km,d_m,label\n";
    char buf[96];
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", c.r_km, c.d_m, c.label);
        os << buf;
    }
}

void write_cell_features_csv(std::ostream& os, std::span<const CellSample> cells) {
    std::vector<LabeledTensor> rows;
    rows.reserve(cells.size());
    for (const auto& c : cells) {
        if (!c.stress) throw std::invalid_argument("write_cell_features_csv: cell has no stress");
        rows.push_back({*c.stress, c.label});
    }
    write_feature_csv(os, rows);
}

Dataset read_dataset_csv(std::istream& is, FeatureSet f) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("dataset CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::map<std::string, std::size_t> col;
    {
        std::istringstream ss(line);
        std::string name;
        std::size_t i = 0;
        while (std::getline(ss, name, ',')) col[name] = i++;
    }
    const auto need = [&](const std::string& name) {
        auto it = col.find(name);
        if (it == col.end()) throw std::runtime_error("dataset CSV: missing column '" + name + "'");
        return it->second;
    };
    const std::size_t label_col = need("label");
    const bool has_tensor = col.count("sxx") != 0;

    std::vector<std::size_t> cols;
    if (f == FeatureSet::DistanceSlip) {
        cols = {need("r_km"), need("d_m")};
    } else if (has_tensor) {
        for (const char* n : {"sxx", "syy", "szz", "sxy", "sxz", "syz"}) cols.push_back(need(n));
    } else {
        if (f == FeatureSet::VonMises || f == FeatureSet::MaxShear)
            throw std::runtime_error("dataset CSV: " + to_string(f) +
                                     " needs signed tensor columns sxx..syz");
        for (std::size_t k = 0; k < 6; ++k) cols.push_back(need(feature_names_12()[k]));
    }

    Dataset data;
    data.spec = feature_spec(f);
    std::size_t row = 1;
    std::vector<std::string> cells;
    while (std::getline(is, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        cells.clear();
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        const auto num = [&](std::size_t c) {
            if (c >= cells.size())
                throw std::runtime_error("dataset CSV: short row " + std::to_string(row));
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cells[c], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != cells[c].size())
                throw std::runtime_error("dataset CSV: bad number on row " + std::to_string(row));
            return v;
        };
        const double lv = num(label_col);
        if (lv != 0.0 && lv != 1.0)
            throw std::runtime_error("dataset CSV: label must be 0 or 1 on row " + std::to_string(row));
        const int label = static_cast<int>(lv);

        std::vector<double> x;
        if (f == FeatureSet::DistanceSlip) {
            x = {num(cols[0]), num(cols[1])};
        } else if (has_tensor) {
            const StressTensor3 s{num(cols[0]), num(cols[1]), num(cols[2]),
                                  num(cols[3]), num(cols[4]), num(cols[5])};
            x = stress_row(s, f);
        } else {
            // absolute components only: xx, xy, xz, yy, yz, zz
            std::array<double, 6> a{};
            for (std::size_t k = 0; k < 6; ++k) a[k] = std::abs(num(cols[k]));
            if (f == FeatureSet::StressA) {
                x = {a[0] + a[1] + a[2] + a[3] + a[4] + a[5]};
            } else {
                x.assign(a.begin(), a.end());
                for (std::size_t k = 0; k < 6; ++k) x.push_back(-a[k]);
            }
        }
        data.push_back(x, label);
    }
    return data;
}

}  // namespace eqbase
