#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eqbase/logreg.hpp"
#include "eqbase/stress.hpp"

namespace eqbase {

using Vec3 = std::array<double, 3>;

/// Planar rectangular rupture. Frame: x east, y north, z up (km).
/// Strike is clockwise from north; the plane dips to the right of strike.
struct RuptureGeom {
    Vec3 center{0.0, 0.0, -10.0};
    double strike_deg = 0.0;
    double dip_deg = 90.0;
    double length_km = 20.0;  ///< along strike
    double width_km = 10.0;   ///< down dip
    double slip_m = 1.0;      ///< mean slip

    void validate() const;
    Vec3 strike_dir() const;
    Vec3 dip_dir() const;  ///< unit vector pointing down dip
    Vec3 normal() const;
};

/// Minimum Euclidean distance from a point to the finite rupture rectangle.
double distance_to_rupture(const Vec3& point, const RuptureGeom& geom);

/// Regular lattice of cell centers around a rupture.
struct CellGridSpec {
    double half_extent_km = 40.0;  ///< x and y range: center +- half extent
    double half_depth_km = 10.0;   ///< z range: center +- half depth
    double spacing_km = 2.0;
    /// Distances are floored here so log r stays finite on the rupture.
    double min_distance_km = 0.5;
    bool with_stress = false;
    double stress_scale = 1.0;

    void validate() const;
};

struct CellSample {
    Vec3 center{};
    double r_km = 0.0;
    double d_m = 0.0;
    std::optional<StressTensor3> stress;
    int label = 0;
};

/// Synthetic double-couple-like stress change at `point`; decays as r^-3 and
/// changes sign across nodal planes.
StressTensor3 synthetic_stress(const Vec3& point, const RuptureGeom& geom, double scale,
                               double min_distance_km);

/// Cells labelled by Bernoulli draws from `truth`, which must use the
/// (neglog r, log d) features.
std::vector<CellSample> synth_grid(const RuptureGeom& geom, const CellGridSpec& spec,
                                   const LogisticModel& truth, std::uint64_t seed);

/// Feature views available for the single-neuron baseline.
enum class FeatureSet {
    DistanceSlip,  ///< (-ln r, ln d)
    StressA,       ///< sum of absolute independent components
    Stress12,      ///< absolute components and their negatives
    VonMises,
    MaxShear,
};

std::string to_string(FeatureSet f);
FeatureSet parse_feature_set(const std::string& text);  ///< rd, A, stress12, vonmises, maxshear
std::vector<FeatureSpec> feature_spec(FeatureSet f);

Dataset make_dataset(std::span<const CellSample> cells, FeatureSet f);

/// Cell CSV `r_km,d_m,label`.
void write_cells_csv(std::ostream& os, std::span<const CellSample> cells);
/// 12-feature table of cells that carry stress.
void write_cell_features_csv(std::ostream& os, std::span<const CellSample> cells);

/// Reads a CSV with a header row and a `label` column and builds the dataset
/// for `f` from the columns it needs: r_km and d_m for DistanceSlip, the
/// twelve feature columns (or sxx..syz) for the stress sets.
Dataset read_dataset_csv(std::istream& is, FeatureSet f);

}  // namespace eqbase
