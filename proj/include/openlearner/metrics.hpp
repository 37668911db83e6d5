#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "openlearner/errors.hpp"

namespace openlearner::metrics {

struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    std::int64_t total() const { return tp + fp + fn + tn; }
    void add(bool predicted_positive, bool actually_positive) {
        if (predicted_positive) {
            (actually_positive ? tp : fp) += 1;
        } else {
            (actually_positive ? fn : tn) += 1;
        }
    }
    ConfusionMatrix& operator+=(const ConfusionMatrix& other) {
        tp += other.tp;
        fp += other.fp;
        fn += other.fn;
        tn += other.tn;
        return *this;
    }
};

struct Scores {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Classification scores from a confusion matrix. 0/0 ratios resolve to 0.
/// Throws ValueError on an empty matrix.
Scores compute(const ConfusionMatrix& cm);

struct LearnerMetrics {
    std::string learner_id;
    std::int64_t event_count = 0; // scored events, equals the matrix total
    Scores scores;
};

/// Event-weighted average of per-learner metrics:
/// aggregate = sum(metric_l * n_l) / sum(n_l). Throws ValueError when the
/// list is empty or carries no events.
Scores weighted_aggregate(std::span<const LearnerMetrics> per_learner);

nlohmann::ordered_json to_json(const Scores& scores);
nlohmann::ordered_json to_json(const LearnerMetrics& lm);

} // namespace openlearner::metrics
