#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace eqbase {

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;

    std::uint64_t total() const { return tp + fn + tn + fp; }
    std::uint64_t positives() const { return tp + fn; }
    std::uint64_t negatives() const { return tn + fp; }

    /// Tally one (predicted, true) pair; any nonzero value counts as 1.
    void add(int predicted, int truth);
    ConfusionCounts& operator+=(const ConfusionCounts& other);
    bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b);

/// Rates derived from a confusion matrix. Components with an empty
/// denominator are std::nullopt and make r_score undefined as well.
struct SkillReport {
    std::optional<double> tpr;
    std::optional<double> tnr;
    std::optional<double> r_score;
    std::uint64_t n_pos = 0;
    std::uint64_t n_neg = 0;
};

/// (predicted, true) label pairs.
using LabelPair = std::pair<int, int>;

ConfusionCounts confusion(std::span<const LabelPair> pairs);

/// TPR, TNR and the R-score (true skill statistic) TPR + TNR - 1.
SkillReport skill(const ConfusionCounts& counts);

/// (score, true label) pairs.
using ScoredLabel = std::pair<double, int>;

/// Probability that a random positive outscores a random negative, ties
/// counted 1/2 (Mann-Whitney). nullopt unless both classes are present.
std::optional<double> roc_auc(std::span<const ScoredLabel> scored);

struct RocPoint {
    double fpr;
    double tpr;
};

/// ROC polyline from (0,0) to (1,1), one vertex per distinct score.
std::vector<RocPoint> roc_curve(std::span<const ScoredLabel> scored);

/// Trapezoidal area under a ROC polyline.
double trapezoid_area(std::span<const RocPoint> curve);

}  // namespace eqbase
