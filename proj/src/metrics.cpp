#include "openlearner/metrics.hpp"

#include <nlohmann/json.hpp>

namespace openlearner::metrics {

namespace {

double ratio(std::int64_t num, std::int64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

Scores compute(const ConfusionMatrix& cm) {
    const std::int64_t total = cm.total();
    if (total < 1) {
        throw ValueError("cannot compute metrics from an empty confusion matrix");
    }
    Scores s;
    s.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);
    s.precision = ratio(cm.tp, cm.tp + cm.fp);
    s.recall = ratio(cm.tp, cm.tp + cm.fn);
    const double pr = s.precision + s.recall;
    s.f1 = pr == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / pr;
    return s;
}

Scores weighted_aggregate(std::span<const LearnerMetrics> per_learner) {
    double weight = 0.0;
    Scores sum;
    for (const auto& lm : per_learner) {
        const auto n = static_cast<double>(lm.event_count);
        sum.accuracy += lm.scores.accuracy * n;
        sum.precision += lm.scores.precision * n;
        sum.recall += lm.scores.recall * n;
        sum.f1 += lm.scores.f1 * n;
        weight += n;
    }
    if (weight == 0.0) {
        throw ValueError("weighted_aggregate needs at least one scored event");
    }
    return {sum.accuracy / weight, sum.precision / weight, sum.recall / weight, sum.f1 / weight};
}

nlohmann::ordered_json to_json(const Scores& scores) {
    return {{"accuracy", scores.accuracy},
            {"precision", scores.precision},
            {"recall", scores.recall},
            {"f1", scores.f1}};
}

nlohmann::ordered_json to_json(const LearnerMetrics& lm) {
    nlohmann::ordered_json doc;
    doc["learner_id"] = lm.learner_id;
    doc["event_count"] = lm.event_count;
    doc["accuracy"] = lm.scores.accuracy;
    doc["precision"] = lm.scores.precision;
    doc["recall"] = lm.scores.recall;
    doc["f1"] = lm.scores.f1;
    return doc;
}

} // namespace openlearner::metrics
