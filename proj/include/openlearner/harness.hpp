#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "openlearner/datasets.hpp"
#include "openlearner/learning.hpp"
#include "openlearner/metrics.hpp"

namespace openlearner::harness {

/// One experiment: which model, which fixed params, which grid to sweep.
struct ExperimentConfig {
    std::string model;
    learning::ClassifierParams params;
    /// field name -> candidate values, exhaustively crossed by sweep().
    std::map<std::string, std::vector<nlohmann::json>> grid;
    std::size_t warm_up_events = 0; ///< events fitted but not scored per learner
    std::size_t min_events = 0;     ///< drop learners with shorter streams (0 = off)
    int jobs = 0;                   ///< learner-level parallelism (0 = hardware)

    static ExperimentConfig from_json(const nlohmann::json& doc);
};

/// Outcome of replaying one learner's stream.
struct SequentialResult {
    metrics::ConfusionMatrix cm;
    models::LearnerHistory history;
    models::LearnerModel learner;
};

/// Sequential predict-then-fit over one time-ordered stream: each event is
/// scored against its label before the model sees it, then fitted. Events
/// with index < warm_up are fitted but not scored. Classifier errors are
/// re-raised with the event index attached.
SequentialResult run_sequential(learning::Classifier& classifier, const std::string& learner_id,
                                std::span<const data::LabelledEvent> stream,
                                std::size_t warm_up = 0);

struct SweepResult {
    learning::ClassifierParams best_params;
    nlohmann::ordered_json best_values; ///< just the swept fields
    double train_f1 = 0.0;
    std::size_t points_evaluated = 0;
};

/// Exhaustive deterministic grid search scored by event-weighted aggregate
/// F1 over the training streams. Grid fields are crossed in sorted field
/// order with the listed value order; ties keep the earliest combination.
SweepResult sweep(const ExperimentConfig& config, const data::LearnerStreams& train);

struct EvalReport {
    std::string model;
    learning::ClassifierParams params;
    metrics::Scores aggregate;
    std::vector<metrics::LearnerMetrics> per_learner;
    nlohmann::ordered_json best_params; ///< swept values, when a sweep ran
    std::size_t warm_up_events = 0;
    double wall_time_seconds = 0.0;

    /// Report document; everything except wall_time_seconds is a pure
    /// function of the inputs.
    nlohmann::ordered_json to_json() const;
};

/// Fresh learner states, one sequential run per test learner (in parallel
/// across learners), event-weighted aggregation. Pass `out_states` to keep
/// the fitted learner models and histories for persistence or rendering.
EvalReport evaluate(const ExperimentConfig& config, const learning::ClassifierParams& params,
                    const data::LearnerStreams& test,
                    std::vector<SequentialResult>* out_states = nullptr);

} // namespace openlearner::harness
