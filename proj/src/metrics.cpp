#include "jamids/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "jamids/errors.hpp"

namespace jamids {

ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> pred) {
    if (truth.size() != pred.size()) throw LengthMismatch("truth and prediction lengths differ");
    if (truth.empty()) throw LengthMismatch("confusion matrix of zero records");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts(index_of(truth[i]), index_of(pred[i]));
    return cm;
}

namespace {

Rate ratio(std::int64_t num, std::int64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Rates rates(const ConfusionMatrix& cm) {
    Rates r;
    r.accuracy = ratio(cm.counts.trace(), cm.total());
    for (int c = 0; c < kNumClasses; ++c) r.per_class_recall[static_cast<std::size_t>(c)] = ratio(cm.counts(c, c), cm.counts.row(c).sum());

    const int normal = index_of(Label::Normal);
    r.tn = cm.counts(normal, normal);
    r.fp = cm.counts.row(normal).sum() - r.tn;
    r.fn = cm.counts.col(normal).sum() - r.tn;
    r.tp = cm.total() - r.tn - r.fp - r.fn;
    r.tpr = ratio(r.tp, r.tp + r.fn);
    r.fpr = ratio(r.fp, r.tn + r.fp);
    r.fnr = ratio(r.fn, r.tp + r.fn);
    return r;
}

RocCurve roc(std::span<const double> scores, std::span<const int> truth) {
    if (scores.size() != truth.size()) throw LengthMismatch("scores and labels differ in length");
    std::int64_t pos = 0, neg = 0;
    for (int t : truth) {
        if (t == 1)
            ++pos;
        else if (t == -1)
            ++neg;
        else
            throw ConfigError("ROC labels must be +1 or -1");
    }
    if (pos == 0 || neg == 0) throw SingleClassError("ROC needs both classes present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

    RocCurve curve;
    const double inf = std::numeric_limits<double>::infinity();
    curve.points.push_back({inf, 0.0, 0.0});
    std::int64_t tp = 0, fp = 0;
    for (std::size_t k = 0; k < order.size();) {
        const double s = scores[order[k]];
        while (k < order.size() && scores[order[k]] == s) {
            if (truth[order[k]] == 1)
                ++tp;
            else
                ++fp;
            ++k;
        }
        curve.points.push_back({s, static_cast<double>(fp) / static_cast<double>(neg),
                                static_cast<double>(tp) / static_cast<double>(pos)});
    }
    curve.points.push_back({-inf, 1.0, 1.0});

    double auc = 0.0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const auto& a = curve.points[k - 1];
        const auto& b = curve.points[k];
        auc += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
    }
    curve.auc = auc;
    return curve;
}

}  // namespace jamids
