#include "openlearner/models.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

namespace openlearner::models {

void EventModel::validate(std::size_t max_topics) const {
    if (topics.empty()) {
        throw ValueError("event must carry at least one topic");
    }
    if (topics.size() > max_topics) {
        throw ValueError("event carries " + std::to_string(topics.size()) +
                         " topics, more than the allowed " + std::to_string(max_topics));
    }
    if (part < 1) {
        throw ValueError("event part index must be >= 1");
    }
    if (!std::isfinite(timestamp)) {
        throw ValueError("event timestamp must be finite");
    }
    std::set<std::int64_t> seen;
    for (const auto& topic : topics) {
        if (!seen.insert(topic.kc.id).second) {
            throw ValueError("event topics must have distinct KC ids (duplicate " +
                             std::to_string(topic.kc.id) + ")");
        }
        if (!(topic.presence >= 0.0 && topic.presence <= 1.0)) {
            throw ValueError("topic presence must be in [0, 1]");
        }
        if (!std::isfinite(topic.depth) || topic.depth < 0.0) {
            throw ValueError("topic depth must be finite and >= 0");
        }
    }
}

std::string LearnerModel::title_of(std::int64_t kc_id) const {
    auto it = kc_titles.find(kc_id);
    if (it != kc_titles.end() && !it->second.empty()) {
        return it->second;
    }
    return "kc-" + std::to_string(kc_id);
}

std::vector<SnapshotEntry> snapshot(const LearnerModel& learner, StateKind kind, int top_k) {
    if (top_k < 1) {
        throw ValueError("snapshot top_k must be >= 1");
    }
    const auto& beliefs = learner.state(kind);
    std::vector<SnapshotEntry> entries;
    entries.reserve(beliefs.size());
    for (const auto& [kc_id, belief] : beliefs) {
        entries.push_back({kc_id, learner.title_of(kc_id), belief.mean(), belief.variance()});
    }
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.mean != b.mean) return a.mean > b.mean;
        return a.kc_id < b.kc_id;
    });
    if (entries.size() > static_cast<std::size_t>(top_k)) {
        entries.resize(static_cast<std::size_t>(top_k));
    }
    return entries;
}

namespace {

nlohmann::ordered_json belief_array(const LearnerModel& learner,
                                    const std::map<std::int64_t, bayes::Gaussian>& beliefs) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& [kc_id, belief] : beliefs) {
        arr.push_back({{"kc_id", kc_id},
                       {"title", learner.title_of(kc_id)},
                       {"mean", belief.mean()},
                       {"variance", belief.variance()}});
    }
    return arr;
}

void read_beliefs(const nlohmann::json& arr, std::map<std::int64_t, bayes::Gaussian>& beliefs,
                  std::map<std::int64_t, std::string>& titles) {
    for (const auto& item : arr) {
        const auto kc_id = item.at("kc_id").get<std::int64_t>();
        beliefs[kc_id] = bayes::Gaussian::from_mean_variance(item.at("mean").get<double>(),
                                                             item.at("variance").get<double>());
        if (item.contains("title")) {
            titles[kc_id] = item.at("title").get<std::string>();
        }
    }
}

} // namespace

nlohmann::ordered_json to_json(const LearnerModel& learner) {
    nlohmann::ordered_json doc;
    doc["learner_id"] = learner.learner_id;
    doc["knowledge"] = belief_array(learner, learner.knowledge);
    doc["interest"] = belief_array(learner, learner.interest);
    doc["engaged_count"] = learner.engaged_count;
    doc["non_engaged_count"] = learner.non_engaged_count;
    return doc;
}

LearnerModel learner_from_json(const nlohmann::json& doc) {
    LearnerModel learner;
    learner.learner_id = doc.at("learner_id").get<std::string>();
    read_beliefs(doc.at("knowledge"), learner.knowledge, learner.kc_titles);
    read_beliefs(doc.at("interest"), learner.interest, learner.kc_titles);
    learner.engaged_count = doc.at("engaged_count").get<std::int64_t>();
    learner.non_engaged_count = doc.at("non_engaged_count").get<std::int64_t>();
    return learner;
}

nlohmann::ordered_json to_json(const LearnerHistory& history) {
    nlohmann::ordered_json doc;
    doc["learner_id"] = history.learner_id;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : history.rows) {
        rows.push_back({{"event_index", row.event_index},
                        {"timestamp", row.timestamp},
                        {"kc_id", row.kc_id},
                        {"mean", row.mean},
                        {"variance", row.variance}});
    }
    doc["rows"] = rows;
    return doc;
}

LearnerHistory history_from_json(const nlohmann::json& doc) {
    LearnerHistory history;
    history.learner_id = doc.at("learner_id").get<std::string>();
    for (const auto& item : doc.at("rows")) {
        history.rows.push_back({item.at("event_index").get<std::int64_t>(),
                                item.at("timestamp").get<double>(),
                                item.at("kc_id").get<std::int64_t>(),
                                item.at("mean").get<double>(),
                                item.at("variance").get<double>()});
    }
    return history;
}

} // namespace openlearner::models
