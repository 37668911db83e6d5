#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "openlearner/gaussian.hpp"

namespace openlearner::models {

/// Default cap on the number of topics attached to one event.
inline constexpr std::size_t kMaxTopics = 5;

/// A Wikipedia-grounded topic identity.
struct KnowledgeComponent {
    std::int64_t id = 0;
    std::string title;
    std::string description; // may be empty
};

/// One topic of an event: which KC it is, how strongly it is present and how
/// deeply the resource covers it. Depth plays the difficulty role.
struct EventTopic {
    KnowledgeComponent kc;
    double presence = 1.0; // in [0, 1]
    double depth = 0.0;    // >= 0
};

/// One watch event: a fragment of a resource plus its top topics.
struct EventModel {
    std::string resource_id;
    int part = 1;            // fragment index, >= 1
    double timestamp = 0.0;  // seconds since epoch
    std::vector<EventTopic> topics;

    /// Throws ValueError unless the event satisfies its invariants:
    /// 1 <= |topics| <= max_topics, distinct KC ids, presence in [0,1],
    /// finite depth >= 0, part >= 1.
    void validate(std::size_t max_topics = kMaxTopics) const;
};

enum class EngagementLabel : int {
    not_engaged = -1,
    engaged = 1,
};

inline int to_sign(EngagementLabel label) { return static_cast<int>(label); }
inline bool is_engaged(EngagementLabel label) { return label == EngagementLabel::engaged; }

enum class StateKind {
    knowledge,
    interest,
};

/// The learner's state: one Gaussian belief per observed KC, split into a
/// knowledge map and an interest map, plus engagement counters. Unobserved
/// KCs are deliberately absent so memory stays proportional to what the
/// learner actually touched.
struct LearnerModel {
    std::string learner_id;
    std::map<std::int64_t, bayes::Gaussian> knowledge;
    std::map<std::int64_t, bayes::Gaussian> interest;
    std::map<std::int64_t, std::string> kc_titles;
    std::int64_t engaged_count = 0;
    std::int64_t non_engaged_count = 0;
    std::optional<double> last_event_time;

    const std::map<std::int64_t, bayes::Gaussian>& state(StateKind kind) const {
        return kind == StateKind::knowledge ? knowledge : interest;
    }
    std::map<std::int64_t, bayes::Gaussian>& state(StateKind kind) {
        return kind == StateKind::knowledge ? knowledge : interest;
    }

    std::string title_of(std::int64_t kc_id) const;
};

/// One row of a learner's state snapshot, ready for rendering.
struct SnapshotEntry {
    std::int64_t kc_id = 0;
    std::string title;
    double mean = 0.0;
    double variance = 0.0;
};

/// Top KCs of one state map, sorted by mean descending with ties broken by
/// KC id ascending. An empty learner yields an empty list.
std::vector<SnapshotEntry> snapshot(const LearnerModel& learner, StateKind kind, int top_k);

/// Evolution of per-KC beliefs over a learner's event stream; input for the
/// line renderer.
struct LearnerHistory {
    struct Row {
        std::int64_t event_index = 0;
        double timestamp = 0.0;
        std::int64_t kc_id = 0;
        double mean = 0.0;
        double variance = 0.0;
    };
    std::string learner_id;
    std::vector<Row> rows;
};

// JSON persistence. Learner documents use exactly the fields
// {learner_id, knowledge: [{kc_id, title, mean, variance}], interest: [...],
//  engaged_count, non_engaged_count}; means and variances round-trip
// bit-exactly.
nlohmann::ordered_json to_json(const LearnerModel& learner);
LearnerModel learner_from_json(const nlohmann::json& doc);

nlohmann::ordered_json to_json(const LearnerHistory& history);
LearnerHistory history_from_json(const nlohmann::json& doc);

} // namespace openlearner::models
