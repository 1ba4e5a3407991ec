#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "mctsga/common.hpp"

namespace mctsga::metrics {

struct ConfusionMatrix {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    long tn = 0;

    long total() const { return tp + fp + fn + tn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

// Prediction convention across the whole library: score >= threshold -> class 1.
inline ConfusionMatrix confusion(std::span<const double> scores, std::span<const int> labels,
                                 double threshold) {
    if (scores.size() != labels.size())
        throw InputError("confusion: scores and labels have different lengths");
    if (scores.empty()) throw InputError("confusion: empty input");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        if (labels[i] == 1) {
            pred ? ++cm.tp : ++cm.fn;
        } else {
            pred ? ++cm.fp : ++cm.tn;
        }
    }
    return cm;
}

inline double accuracy(const ConfusionMatrix& cm) {
    if (cm.total() <= 0) throw InputError("accuracy: empty confusion matrix");
    return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

inline double recall(const ConfusionMatrix& cm) {
    if (cm.tp + cm.fn <= 0) throw InputError("recall: no positive samples");
    return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
}

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    bool operator==(const RocPoint&) const = default;
};

// One point per distinct score threshold, swept descending, with (0,0)
// prepended and (1,1) guaranteed at the end. Tied scores enter as a single
// step so the trapezoid below gives the tie-adjusted AUC.
inline std::vector<RocPoint> roc_points(std::span<const double> scores,
                                        std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw InputError("roc_points: scores and labels have different lengths");
    long pos = 0, neg = 0;
    for (const int y : labels) (y == 1 ? pos : neg)++;
    if (pos == 0 || neg == 0) throw InputError("roc_points: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    std::vector<RocPoint> points;
    points.push_back({0.0, 0.0});
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (labels[order[i]] == 1 ? tp : fp)++;
            ++i;
        }
        points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                          static_cast<double>(tp) / static_cast<double>(pos)});
    }
    if (points.back() != RocPoint{1.0, 1.0}) points.push_back({1.0, 1.0});
    return points;
}

inline double auc(std::span<const RocPoint> points) {
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) * 0.5;
    }
    return area;
}

// Everything Table-I-style reporting needs for one score vector.
struct Evaluation {
    ConfusionMatrix cm;
    double accuracy = 0.0;
    double recall = 0.0;
    double auc = 0.0;
    std::vector<RocPoint> roc;
};

inline Evaluation evaluate_scores(std::span<const double> scores, std::span<const int> labels,
                                  double threshold = 0.5) {
    Evaluation ev;
    ev.cm = confusion(scores, labels, threshold);
    ev.accuracy = accuracy(ev.cm);
    ev.recall = recall(ev.cm);
    ev.roc = roc_points(scores, labels);
    ev.auc = auc(ev.roc);
    return ev;
}

}  // namespace mctsga::metrics
