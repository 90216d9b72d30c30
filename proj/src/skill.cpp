#include "eqbase/skill.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eqbase {

void ConfusionCounts::add(int predicted, int truth) {
    const bool p = predicted != 0;
    const bool t = truth != 0;
    if (p && t) ++tp;
    else if (!p && t) ++fn;
    else if (!p && !t) ++tn;
    else ++fp;
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fn += o.fn;
    tn += o.tn;
    fp += o.fp;
    return *this;
}

ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) { return a += b; }

ConfusionCounts confusion(std::span<const LabelPair> pairs) {
    ConfusionCounts c;
    for (const auto& [pred, truth] : pairs) c.add(pred, truth);
    return c;
}

SkillReport skill(const ConfusionCounts& c) {
    SkillReport r;
    r.n_pos = c.positives();
    r.n_neg = c.negatives();
    if (r.n_pos > 0) r.tpr = static_cast<double>(c.tp) / static_cast<double>(r.n_pos);
    if (r.n_neg > 0) r.tnr = static_cast<double>(c.tn) / static_cast<double>(r.n_neg);
    if (r.tpr && r.tnr) r.r_score = *r.tpr + *r.tnr - 1.0;
    return r;
}

namespace {

std::vector<ScoredLabel> sorted_by_score(std::span<const ScoredLabel> scored) {
    std::vector<ScoredLabel> v(scored.begin(), scored.end());
    for (const auto& s : v)
        if (std::isnan(s.first)) throw std::invalid_argument("roc: NaN score");
    std::sort(v.begin(), v.end(),
              [](const ScoredLabel& a, const ScoredLabel& b) { return a.first < b.first; });
    return v;
}

}  // namespace

std::optional<double> roc_auc(std::span<const ScoredLabel> scored) {
    const auto v = sorted_by_score(scored);
    // Mann-Whitney U from tie-averaged ranks, accumulated group by group.
    double n_pos = 0.0;
    double n_neg = 0.0;
    double u = 0.0;  // sum over positives of (#negatives below + 1/2 #negatives tied)
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        double pos = 0.0;
        double neg = 0.0;
        while (j < v.size() && v[j].first == v[i].first) {
            (v[j].second != 0 ? pos : neg) += 1.0;
            ++j;
        }
        u += pos * (n_neg + 0.5 * neg);
        n_pos += pos;
        n_neg += neg;
        i = j;
    }
    if (n_pos == 0.0 || n_neg == 0.0) return std::nullopt;
    return u / (n_pos * n_neg);
}

std::vector<RocPoint> roc_curve(std::span<const ScoredLabel> scored) {
    auto v = sorted_by_score(scored);
    std::reverse(v.begin(), v.end());
    double total_pos = 0.0;
    double total_neg = 0.0;
    for (const auto& s : v) (s.second != 0 ? total_pos : total_neg) += 1.0;

    std::vector<RocPoint> curve{{0.0, 0.0}};
    double tp = 0.0;
    double fp = 0.0;
    std::size_t i = 0;
    while (i < v.size()) {
        const double score = v[i].first;
        while (i < v.size() && v[i].first == score) {
            (v[i].second != 0 ? tp : fp) += 1.0;
            ++i;
        }
        curve.push_back({total_neg > 0 ? fp / total_neg : 0.0, total_pos > 0 ? tp / total_pos : 0.0});
    }
    return curve;
}

double trapezoid_area(std::span<const RocPoint> curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) * 0.5;
    return area;
}

}  // namespace eqbase
