#include "openlearner/learning.hpp"

#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace openlearner::learning {

using models::EngagementLabel;
using models::EventModel;
using models::LearnerModel;
using models::StateKind;

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw ValueError(message);
    }
}

double number_or_throw(std::string_view name, const nlohmann::json& value) {
    if (!value.is_number()) {
        throw ValueError("hyperparameter '" + std::string(name) + "' must be a number");
    }
    return value.get<double>();
}

} // namespace

void ClassifierParams::validate() const {
    require(std::isfinite(init_mean), "init_mean must be finite");
    require(std::isfinite(init_variance) && init_variance > 0.0, "init_variance must be > 0");
    require(std::isfinite(beta) && beta > 0.0, "beta must be > 0");
    require(std::isfinite(tau) && tau >= 0.0, "tau must be >= 0");
    require(draw_probability > 0.0 && draw_probability < 1.0,
            "draw_probability must lie in (0, 1)");
    if (draw_margin) {
        require(std::isfinite(*draw_margin) && *draw_margin >= 0.0, "draw_margin must be >= 0");
    }
    require(std::isfinite(decay_rate) && decay_rate >= 0.0, "decay_rate must be >= 0");
    require(threshold >= 0.0 && threshold <= 1.0, "threshold must lie in [0, 1]");
    require(std::isfinite(interest_threshold), "interest_threshold must be finite");
    require(std::isfinite(eta) && eta > 0.0, "eta must be > 0");
}

void ClassifierParams::set(std::string_view name, const nlohmann::json& value) {
    if (name == "init_mean") {
        init_mean = number_or_throw(name, value);
    } else if (name == "init_variance") {
        init_variance = number_or_throw(name, value);
    } else if (name == "beta") {
        beta = number_or_throw(name, value);
    } else if (name == "tau") {
        tau = number_or_throw(name, value);
    } else if (name == "draw_probability") {
        draw_probability = number_or_throw(name, value);
    } else if (name == "draw_margin") {
        if (value.is_null()) {
            draw_margin.reset();
        } else {
            draw_margin = number_or_throw(name, value);
        }
    } else if (name == "decay_rate") {
        decay_rate = number_or_throw(name, value);
    } else if (name == "threshold") {
        threshold = number_or_throw(name, value);
    } else if (name == "interest_threshold") {
        interest_threshold = number_or_throw(name, value);
    } else if (name == "eta") {
        eta = number_or_throw(name, value);
    } else {
        throw ValueError("unknown hyperparameter '" + std::string(name) + "'");
    }
    validate();
}

ClassifierParams ClassifierParams::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw ValueError("hyperparameters must be a flat JSON object");
    }
    ClassifierParams params;
    for (const auto& [key, value] : doc.items()) {
        params.set(key, value);
    }
    params.validate();
    return params;
}

nlohmann::ordered_json ClassifierParams::to_json() const {
    nlohmann::ordered_json doc;
    doc["init_mean"] = init_mean;
    doc["init_variance"] = init_variance;
    doc["beta"] = beta;
    doc["tau"] = tau;
    doc["draw_probability"] = draw_probability;
    if (draw_margin) {
        doc["draw_margin"] = *draw_margin;
    }
    doc["decay_rate"] = decay_rate;
    doc["threshold"] = threshold;
    doc["interest_threshold"] = interest_threshold;
    doc["eta"] = eta;
    return doc;
}

Classifier::Classifier(ClassifierParams params) : params_(std::move(params)) {
    params_.validate();
}

void Classifier::fit(LearnerModel& learner, const EventModel& event, EngagementLabel label) {
    event.validate();
    if (learner.last_event_time && event.timestamp < *learner.last_event_time) {
        throw ModelError("out-of-order event for learner '" + learner.learner_id +
                         "': timestamp " + std::to_string(event.timestamp) + " precedes " +
                         std::to_string(*learner.last_event_time));
    }
    do_fit(learner, event, label);
    if (models::is_engaged(label)) {
        learner.engaged_count += 1;
    } else {
        learner.non_engaged_count += 1;
    }
    learner.last_event_time = event.timestamp;
}

Prediction Classifier::predict(const LearnerModel& learner, const EventModel& event) const {
    const double p = predict_proba(learner, event);
    return {p, p >= params_.threshold ? EngagementLabel::engaged : EngagementLabel::not_engaged};
}

// --- baselines -------------------------------------------------------------

double EngageClassifier::predict_proba(const LearnerModel&, const EventModel&) const {
    return 1.0;
}

double MajorityClassifier::predict_proba(const LearnerModel& learner, const EventModel&) const {
    const auto total = learner.engaged_count + learner.non_engaged_count;
    if (total == 0) {
        return 0.5;
    }
    return static_cast<double>(learner.engaged_count) / static_cast<double>(total);
}

double PersistenceClassifier::predict_proba(const LearnerModel&, const EventModel&) const {
    if (!last_label_) {
        return 1.0;
    }
    return models::is_engaged(*last_label_) ? 1.0 : 0.0;
}

void PersistenceClassifier::do_fit(LearnerModel&, const EventModel&, EngagementLabel label) {
    last_label_ = label;
}

// --- team machinery ---------------------------------------------------------

namespace {

// One member of the learner-side team: a per-KC belief entering the update
// with a linear coefficient.
struct TeamMember {
    std::int64_t kc_id = 0;
    const models::KnowledgeComponent* kc = nullptr;
    double coeff = 1.0;
    double mean = 0.0;
    double variance = 0.0;
};

// Learner team against a point-mass content team. delta is the mean
// performance difference, c2 its full variance including the 2*beta^2 noise
// per participating pair.
struct TeamView {
    std::vector<TeamMember> members;
    double delta = 0.0;
    double var_team = 0.0;
    double coeff_sq = 0.0;

    double c2(double beta) const { return var_team + 2.0 * beta * beta * coeff_sq; }
};

enum class ContentSide { depth, interest_threshold };

// Collect the event's topics as a team. extra_variance is the dynamics
// inflation applied to every member belief (persisted by the update).
TeamView gather(const LearnerModel& learner, const EventModel& event,
                const ClassifierParams& params, StateKind kind, ContentSide content,
                bool presence_weighted, double extra_variance) {
    const auto& beliefs = learner.state(kind);
    TeamView team;
    team.members.reserve(event.topics.size());
    double learner_mean = 0.0;
    double content_mean = 0.0;
    for (const auto& topic : event.topics) {
        TeamMember member;
        member.kc_id = topic.kc.id;
        member.kc = &topic.kc;
        member.coeff = presence_weighted ? topic.presence : 1.0;
        const auto it = beliefs.find(topic.kc.id);
        if (it != beliefs.end()) {
            member.mean = it->second.mean();
            member.variance = it->second.variance() + extra_variance;
        } else {
            member.mean = params.init_mean;
            member.variance = params.init_variance + extra_variance;
        }
        learner_mean += member.coeff * member.mean;
        content_mean += member.coeff * (content == ContentSide::depth ? topic.depth
                                                                      : params.interest_threshold);
        team.var_team += member.coeff * member.coeff * member.variance;
        team.coeff_sq += member.coeff * member.coeff;
        team.members.push_back(member);
    }
    team.delta = learner_mean - content_mean;
    return team;
}

// Draw margin from the configured draw probability, scaled by beta and the
// total number of performances involved (two teams of |topics| each).
double draw_margin_for(const ClassifierParams& params, std::size_t n_topics) {
    if (params.draw_margin) {
        return *params.draw_margin;
    }
    return bayes::inverse_normal_cdf(0.5 * (params.draw_probability + 1.0)) *
           std::sqrt(2.0 * static_cast<double>(n_topics)) * params.beta;
}

enum class Outcome {
    team_wins,   // performance difference exceeds +margin
    team_loses,  // performance difference falls below -margin
    draw,        // performance difference lands within the margin
};

// Single-truncation expectation-propagation update: moment-match the team
// performance difference against the observed outcome and push the shift
// back onto every member belief. Writes posteriors (and titles) into the
// learner's map.
void apply_team_update(LearnerModel& learner, StateKind kind, const TeamView& team,
                       const ClassifierParams& params, Outcome outcome, double margin) {
    if (team.coeff_sq == 0.0) {
        return; // no participating mass, nothing to update
    }
    const double c2 = team.c2(params.beta);
    const double c = std::sqrt(c2);
    const double sign = outcome == Outcome::team_loses ? -1.0 : 1.0;

    double v = 0.0;
    double w = 0.0;
    if (outcome == Outcome::draw) {
        v = bayes::v_within(team.delta / c, margin / c);
        w = bayes::w_within(team.delta / c, margin / c);
    } else {
        v = bayes::v_greater(sign * team.delta / c, margin / c);
        w = bayes::w_greater(sign * team.delta / c, margin / c);
    }

    auto& beliefs = learner.state(kind);
    for (const auto& member : team.members) {
        const double gain = member.coeff * member.variance / c;
        const double shrink = 1.0 - member.coeff * member.coeff * member.variance / c2 * w;
        const double post_mean = member.mean + sign * gain * v;
        const double post_var = member.variance * shrink;
        beliefs[member.kc_id] = bayes::Gaussian::from_mean_variance(post_mean, post_var);
        if (member.kc != nullptr && !member.kc->title.empty()) {
            learner.kc_titles[member.kc_id] = member.kc->title;
        }
    }
}

double interest_drift(const LearnerModel& learner, const EventModel& event,
                      const ClassifierParams& params) {
    if (!learner.last_event_time) {
        return 0.0;
    }
    const double dt_hours = (event.timestamp - *learner.last_event_time) / 3600.0;
    return params.decay_rate * dt_hours * params.tau * params.tau;
}

} // namespace

// --- knowledge ---------------------------------------------------------------

double KnowledgeClassifier::predict_proba(const LearnerModel& learner,
                                          const EventModel& event) const {
    event.validate();
    const TeamView team = gather(learner, event, params_, StateKind::knowledge,
                                 ContentSide::depth, false, 0.0);
    return bayes::normal_cdf(team.delta / std::sqrt(team.c2(params_.beta)));
}

void KnowledgeClassifier::do_fit(LearnerModel& learner, const EventModel& event,
                                 EngagementLabel label) {
    const TeamView team = gather(learner, event, params_, StateKind::knowledge,
                                 ContentSide::depth, false, params_.tau * params_.tau);
    const Outcome outcome =
        models::is_engaged(label) ? Outcome::team_wins : Outcome::team_loses;
    apply_team_update(learner, StateKind::knowledge, team, params_, outcome, 0.0);
}

// --- novelty -----------------------------------------------------------------

double NoveltyClassifier::predict_proba(const LearnerModel& learner,
                                        const EventModel& event) const {
    event.validate();
    const TeamView team = gather(learner, event, params_, StateKind::knowledge,
                                 ContentSide::depth, false, 0.0);
    const double s = std::sqrt(team.c2(params_.beta));
    const double margin = draw_margin_for(params_, event.topics.size());
    return bayes::normal_cdf((margin - team.delta) / s) -
           bayes::normal_cdf((-margin - team.delta) / s);
}

void NoveltyClassifier::do_fit(LearnerModel& learner, const EventModel& event,
                               EngagementLabel label) {
    const TeamView team = gather(learner, event, params_, StateKind::knowledge,
                                 ContentSide::depth, false, params_.tau * params_.tau);
    const double margin = draw_margin_for(params_, event.topics.size());
    Outcome outcome = Outcome::draw;
    if (!models::is_engaged(label)) {
        // The binary label does not say whether the material was too easy or
        // too hard; side with the current belief, ties count as too hard.
        outcome = team.delta > 0.0 ? Outcome::team_wins : Outcome::team_loses;
    }
    apply_team_update(learner, StateKind::knowledge, team, params_, outcome, margin);
}

// --- interest ----------------------------------------------------------------

double InterestClassifier::predict_proba(const LearnerModel& learner,
                                         const EventModel& event) const {
    event.validate();
    const TeamView team = gather(learner, event, params_, StateKind::interest,
                                 ContentSide::interest_threshold, true, 0.0);
    if (team.coeff_sq == 0.0) {
        return 0.5; // zero presence everywhere carries no interest signal
    }
    return bayes::normal_cdf(team.delta / std::sqrt(team.c2(params_.beta)));
}

void InterestClassifier::do_fit(LearnerModel& learner, const EventModel& event,
                                EngagementLabel label) {
    const TeamView team = gather(learner, event, params_, StateKind::interest,
                                 ContentSide::interest_threshold, true,
                                 interest_drift(learner, event, params_));
    const Outcome outcome =
        models::is_engaged(label) ? Outcome::team_wins : Outcome::team_loses;
    apply_team_update(learner, StateKind::interest, team, params_, outcome, 0.0);
}

// --- ensemble ----------------------------------------------------------------

InkClassifier::InkClassifier(ClassifierParams params)
    : Classifier(params), interest_(params), novelty_(params), knowledge_(params),
      weights_{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0} {}

void InkClassifier::set_weights(const std::array<double, 3>& weights) {
    double sum = 0.0;
    for (double w : weights) {
        require(std::isfinite(w) && w >= 0.0, "ensemble weights must be >= 0");
        sum += w;
    }
    require(std::fabs(sum - 1.0) <= 1e-9, "ensemble weights must sum to 1");
    weights_ = weights;
}

double InkClassifier::predict_proba(const LearnerModel& learner, const EventModel& event) const {
    return weights_[0] * interest_.predict_proba(learner, event) +
           weights_[1] * novelty_.predict_proba(learner, event) +
           weights_[2] * knowledge_.predict_proba(learner, event);
}

void InkClassifier::do_fit(LearnerModel& learner, const EventModel& event,
                           EngagementLabel label) {
    const std::array<double, 3> probs = {interest_.predict_proba(learner, event),
                                         novelty_.predict_proba(learner, event),
                                         knowledge_.predict_proba(learner, event)};

    apply_fit(interest_, learner, event, label);
    apply_fit(novelty_, learner, event, label);
    apply_fit(knowledge_, learner, event, label);

    const double y = models::is_engaged(label) ? 1.0 : 0.0;
    double norm = 0.0;
    for (std::size_t m = 0; m < 3; ++m) {
        const double loss = std::fabs(probs[m] - y);
        weights_[m] *= std::exp(-params_.eta * loss);
        norm += weights_[m];
    }
    if (norm <= 0.0) {
        weights_ = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}; // all weights underflowed
        return;
    }
    for (double& w : weights_) {
        w /= norm;
    }
}

// --- factory -----------------------------------------------------------------

std::unique_ptr<Classifier> make_classifier(std::string_view model, ClassifierParams params) {
    if (model == "engage") return std::make_unique<EngageClassifier>(std::move(params));
    if (model == "majority") return std::make_unique<MajorityClassifier>(std::move(params));
    if (model == "persistence") return std::make_unique<PersistenceClassifier>(std::move(params));
    if (model == "interest") return std::make_unique<InterestClassifier>(std::move(params));
    if (model == "novelty") return std::make_unique<NoveltyClassifier>(std::move(params));
    if (model == "knowledge") return std::make_unique<KnowledgeClassifier>(std::move(params));
    if (model == "ink") return std::make_unique<InkClassifier>(std::move(params));
    throw ValueError("unknown model '" + std::string(model) +
                     "'; expected one of engage, majority, persistence, interest, novelty, "
                     "knowledge, ink");
}

bool is_known_model(std::string_view model) {
    static constexpr std::string_view known[] = {"engage",  "majority",  "persistence", "interest",
                                                 "novelty", "knowledge", "ink"};
    for (auto name : known) {
        if (model == name) return true;
    }
    return false;
}

} // namespace openlearner::learning
