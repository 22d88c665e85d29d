#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "jamids/label.hpp"

namespace jamids {

// Rows are the true class, columns the predicted class, both in Label order.
struct ConfusionMatrix {
    Eigen::Matrix<std::int64_t, kNumClasses, kNumClasses> counts =
        Eigen::Matrix<std::int64_t, kNumClasses, kNumClasses>::Zero();

    std::int64_t total() const { return counts.sum(); }
    std::int64_t operator()(Label truth, Label pred) const { return counts(index_of(truth), index_of(pred)); }
};

ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> pred);

// Undefined ratios (zero denominators) are std::nullopt.
using Rate = std::optional<double>;

// Binary quantities treat every jamming class as the positive "attack" class.
struct Rates {
    Rate accuracy;
    std::array<Rate, kNumClasses> per_class_recall;
    std::int64_t tp = 0, fn = 0, fp = 0, tn = 0;
    Rate tpr;  // TP / (TP + FN)
    Rate fpr;  // FP / (TN + FP)
    Rate fnr;  // FN / (TP + FN): attacks finally called Normal over all attacks
};

Rates rates(const ConfusionMatrix& cm);

struct RocPoint {
    double threshold;
    double fpr;
    double tpr;
};

// Points run from threshold +inf (0, 0) down to -inf (1, 1); a record counts as
// positive at threshold t when its score >= t. Tied scores share one point.
struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

// truth entries are +1 (attack) or -1 (normal).
RocCurve roc(std::span<const double> scores, std::span<const int> truth);

}  // namespace jamids
