#include "openlearner/harness.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

namespace openlearner::harness {

using learning::ClassifierParams;

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
    ExperimentConfig config;
    if (doc.contains("model")) {
        config.model = doc.at("model").get<std::string>();
    }
    if (doc.contains("params")) {
        config.params = ClassifierParams::from_json(doc.at("params"));
    }
    if (doc.contains("grid")) {
        for (const auto& [field, values] : doc.at("grid").items()) {
            if (!values.is_array() || values.empty()) {
                throw ValueError("grid entry '" + field + "' must be a non-empty array");
            }
            config.grid[field] = std::vector<nlohmann::json>(values.begin(), values.end());
        }
    }
    if (doc.contains("warm_up_events")) {
        config.warm_up_events = doc.at("warm_up_events").get<std::size_t>();
    }
    if (doc.contains("min_events")) {
        config.min_events = doc.at("min_events").get<std::size_t>();
    }
    if (doc.contains("jobs")) {
        config.jobs = doc.at("jobs").get<int>();
    }
    return config;
}

SequentialResult run_sequential(learning::Classifier& classifier, const std::string& learner_id,
                                std::span<const data::LabelledEvent> stream,
                                std::size_t warm_up) {
    SequentialResult result;
    result.learner.learner_id = learner_id;
    result.history.learner_id = learner_id;

    for (std::size_t index = 0; index < stream.size(); ++index) {
        const auto& [event, label] = stream[index];
        try {
            if (index >= warm_up) {
                const auto prediction = classifier.predict(result.learner, event);
                result.cm.add(prediction.label == models::EngagementLabel::engaged,
                              models::is_engaged(label));
            }
            classifier.fit(result.learner, event, label);
        } catch (const std::exception& e) {
            throw ModelError("event " + std::to_string(index) + " of learner '" + learner_id +
                             "': " + e.what());
        }

        // record the beliefs this fit touched
        const auto updated = classifier.updated_state();
        if (updated == learning::UpdatedState::none) {
            continue;
        }
        const auto& beliefs = updated == learning::UpdatedState::interest
                                  ? result.learner.interest
                                  : result.learner.knowledge;
        for (const auto& topic : event.topics) {
            const auto it = beliefs.find(topic.kc.id);
            if (it != beliefs.end()) {
                result.history.rows.push_back({static_cast<std::int64_t>(index), event.timestamp,
                                               topic.kc.id, it->second.mean(),
                                               it->second.variance()});
            }
        }
    }
    return result;
}

namespace {

struct LearnerRun {
    const std::string* learner_id;
    const std::vector<data::LabelledEvent>* stream;
};

// Run every learner with a fresh classifier, in parallel, and assemble the
// per-learner metrics in learner-id order so the aggregate is deterministic.
std::vector<metrics::LearnerMetrics> run_all(const std::string& model,
                                             const ClassifierParams& params,
                                             const data::LearnerStreams& streams,
                                             std::size_t warm_up, std::size_t min_events,
                                             int jobs,
                                             std::vector<SequentialResult>* out_states) {
    std::vector<LearnerRun> runs;
    runs.reserve(streams.size());
    for (const auto& [learner_id, stream] : streams) {
        if (min_events > 0 && stream.size() < min_events) {
            continue;
        }
        runs.push_back({&learner_id, &stream});
    }

    std::vector<metrics::LearnerMetrics> per_learner(runs.size());
    std::vector<char> scored(runs.size(), 0);
    if (out_states != nullptr) {
        out_states->clear();
        out_states->resize(runs.size());
    }

    unsigned n_threads = jobs > 0 ? static_cast<unsigned>(jobs)
                                  : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, std::max<std::size_t>(runs.size(), 1));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= runs.size()) {
                return;
            }
            try {
                auto classifier = learning::make_classifier(model, params);
                auto result =
                    run_sequential(*classifier, *runs[i].learner_id, *runs[i].stream, warm_up);
                if (result.cm.total() > 0) {
                    per_learner[i] = {*runs[i].learner_id, result.cm.total(),
                                      metrics::compute(result.cm)};
                    scored[i] = 1;
                }
                if (out_states != nullptr) {
                    (*out_states)[i] = std::move(result);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(runs.size());
                return;
            }
        }
    };

    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned i = 0; i < n_threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& thread : pool) {
            thread.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    std::vector<metrics::LearnerMetrics> kept;
    kept.reserve(per_learner.size());
    for (std::size_t i = 0; i < per_learner.size(); ++i) {
        if (scored[i]) {
            kept.push_back(std::move(per_learner[i]));
        }
    }
    return kept;
}

} // namespace

SweepResult sweep(const ExperimentConfig& config, const data::LearnerStreams& train) {
    if (config.grid.empty()) {
        throw ValueError("sweep requires a non-empty parameter grid");
    }
    if (!learning::is_known_model(config.model)) {
        throw ValueError("unknown model '" + config.model + "'");
    }

    // Cross the grid in lexicographic order: fields sorted by name (as the
    // map iterates), values in their listed order, first field slowest.
    std::vector<std::string> fields;
    std::vector<const std::vector<nlohmann::json>*> values;
    std::size_t total = 1;
    for (const auto& [field, candidates] : config.grid) {
        fields.push_back(field);
        values.push_back(&candidates);
        total *= candidates.size();
    }

    SweepResult result;
    double best_f1 = -1.0;
    std::vector<std::size_t> odometer(fields.size(), 0);
    for (std::size_t point = 0; point < total; ++point) {
        ClassifierParams params = config.params;
        nlohmann::ordered_json assignment;
        for (std::size_t f = 0; f < fields.size(); ++f) {
            params.set(fields[f], (*values[f])[odometer[f]]);
            assignment[fields[f]] = (*values[f])[odometer[f]];
        }

        const auto per_learner = run_all(config.model, params, train, config.warm_up_events,
                                         config.min_events, config.jobs, nullptr);
        double f1 = 0.0;
        if (!per_learner.empty()) {
            f1 = metrics::weighted_aggregate(per_learner).f1;
        }
        if (f1 > best_f1) {
            best_f1 = f1;
            result.best_params = params;
            result.best_values = assignment;
        }
        result.points_evaluated += 1;

        // advance odometer, last field fastest
        for (std::size_t f = fields.size(); f-- > 0;) {
            if (++odometer[f] < values[f]->size()) {
                break;
            }
            odometer[f] = 0;
        }
    }
    result.train_f1 = best_f1 < 0.0 ? 0.0 : best_f1;
    return result;
}

EvalReport evaluate(const ExperimentConfig& config, const ClassifierParams& params,
                    const data::LearnerStreams& test,
                    std::vector<SequentialResult>* out_states) {
    if (!learning::is_known_model(config.model)) {
        throw ValueError("unknown model '" + config.model + "'");
    }
    const auto start = std::chrono::steady_clock::now();

    EvalReport report;
    report.model = config.model;
    report.params = params;
    report.warm_up_events = config.warm_up_events;
    report.per_learner = run_all(config.model, params, test, config.warm_up_events,
                                 config.min_events, config.jobs, out_states);
    if (!report.per_learner.empty()) {
        report.aggregate = metrics::weighted_aggregate(report.per_learner);
    }
    report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json doc;
    doc["model"] = model;
    doc["params"] = params.to_json();
    doc["aggregate"] = metrics::to_json(aggregate);
    nlohmann::ordered_json learners = nlohmann::ordered_json::array();
    for (const auto& lm : per_learner) {
        learners.push_back(metrics::to_json(lm));
    }
    doc["per_learner"] = learners;
    if (!best_params.is_null()) {
        doc["best_params"] = best_params;
    }
    doc["warm_up_events"] = warm_up_events;
    doc["wall_time_seconds"] = wall_time_seconds;
    return doc;
}

} // namespace openlearner::harness
