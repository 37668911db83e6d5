#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "openlearner/models.hpp"

namespace openlearner::learning {

/// Hyperparameters shared by the classifier family. Every setter validates;
/// invalid values are rejected with a descriptive ValueError.
struct ClassifierParams {
    double init_mean = 0.0;            ///< prior belief mean for unseen KCs
    double init_variance = 0.5;        ///< prior belief variance, > 0
    double beta = 0.5;                 ///< performance noise std dev, > 0 (beta^2 = init_variance/2)
    double tau = 0.0;                  ///< dynamics noise std dev, >= 0
    double draw_probability = 0.1;     ///< in (0, 1); inverted into a draw margin per event
    std::optional<double> draw_margin; ///< fixed margin >= 0; overrides draw_probability when set
    double decay_rate = 0.0;           ///< interest forgetting rate per hour, >= 0
    double threshold = 0.5;            ///< decision threshold on the probability, in [0, 1]
    double interest_threshold = 0.5;   ///< interest level that corresponds to a coin-flip
    double eta = 0.5;                  ///< ensemble multiplicative-weights learning rate, > 0

    void validate() const;

    /// Flat JSON object keyed by the field names above; unknown keys are
    /// rejected.
    static ClassifierParams from_json(const nlohmann::json& doc);
    nlohmann::ordered_json to_json() const;

    /// Assign one field by name from a JSON value, with validation.
    void set(std::string_view name, const nlohmann::json& value);
};

struct Prediction {
    double probability = 0.0;
    models::EngagementLabel label = models::EngagementLabel::not_engaged;
};

/// Which learner-state maps a classifier updates; drives history recording.
enum class UpdatedState {
    none,
    knowledge,
    interest,
    knowledge_and_interest,
};

/// Uniform online contract: predict-then-fit, one Bayesian update per event,
/// O(|topics|) work, no cross-learner state.
class Classifier {
public:
    explicit Classifier(ClassifierParams params);
    virtual ~Classifier() = default;

    virtual std::string_view name() const = 0;
    virtual UpdatedState updated_state() const { return UpdatedState::none; }

    /// One online update from a labelled event. Validates the event, rejects
    /// out-of-order timestamps, then applies the model-specific update and
    /// bumps the engagement counters.
    void fit(models::LearnerModel& learner, const models::EventModel& event,
             models::EngagementLabel label);

    /// Engagement probability for the event given the current learner state.
    /// Unseen KCs are treated at the prior. Never mutates the learner.
    virtual double predict_proba(const models::LearnerModel& learner,
                                 const models::EventModel& event) const = 0;

    /// predict_proba thresholded at params.threshold (engaged iff >=).
    Prediction predict(const models::LearnerModel& learner,
                       const models::EventModel& event) const;

    const ClassifierParams& params() const { return params_; }

protected:
    virtual void do_fit(models::LearnerModel& learner, const models::EventModel& event,
                        models::EngagementLabel label) = 0;

    /// Lets an ensemble drive a constituent's update without re-running the
    /// counter bookkeeping of the public fit().
    static void apply_fit(Classifier& constituent, models::LearnerModel& learner,
                          const models::EventModel& event, models::EngagementLabel label) {
        constituent.do_fit(learner, event, label);
    }

    ClassifierParams params_;
};

// Baselines (never touch Gaussian state).

/// Always predicts engaged with probability 1.
class EngageClassifier final : public Classifier {
public:
    using Classifier::Classifier;
    std::string_view name() const override { return "engage"; }
    double predict_proba(const models::LearnerModel&, const models::EventModel&) const override;

protected:
    void do_fit(models::LearnerModel&, const models::EventModel&,
                models::EngagementLabel) override {}
};

/// Predicts the learner's majority label so far; ties go to engaged.
class MajorityClassifier final : public Classifier {
public:
    using Classifier::Classifier;
    std::string_view name() const override { return "majority"; }
    double predict_proba(const models::LearnerModel&, const models::EventModel&) const override;

protected:
    void do_fit(models::LearnerModel&, const models::EventModel&,
                models::EngagementLabel) override {}
};

/// Repeats the learner's previous label; the first event predicts engaged.
class PersistenceClassifier final : public Classifier {
public:
    using Classifier::Classifier;
    std::string_view name() const override { return "persistence"; }
    double predict_proba(const models::LearnerModel&, const models::EventModel&) const override;

protected:
    void do_fit(models::LearnerModel&, const models::EventModel&,
                models::EngagementLabel label) override;

private:
    std::optional<models::EngagementLabel> last_label_;
};

/// Skill-vs-depth model: the learner engages when their skill team can meet
/// the content's depth demands.
class KnowledgeClassifier final : public Classifier {
public:
    using Classifier::Classifier;
    std::string_view name() const override { return "knowledge"; }
    UpdatedState updated_state() const override { return UpdatedState::knowledge; }
    double predict_proba(const models::LearnerModel&, const models::EventModel&) const override;

protected:
    void do_fit(models::LearnerModel&, const models::EventModel&,
                models::EngagementLabel) override;
};

/// Draw-margin model: engagement means the material is neither too easy nor
/// too hard, i.e. learner and content performances land within the margin.
class NoveltyClassifier final : public Classifier {
public:
    using Classifier::Classifier;
    std::string_view name() const override { return "novelty"; }
    UpdatedState updated_state() const override { return UpdatedState::knowledge; }
    double predict_proba(const models::LearnerModel&, const models::EventModel&) const override;

protected:
    void do_fit(models::LearnerModel&, const models::EventModel&,
                models::EngagementLabel) override;
};

/// Presence-weighted interest tracker with optional time decay.
class InterestClassifier final : public Classifier {
public:
    using Classifier::Classifier;
    std::string_view name() const override { return "interest"; }
    UpdatedState updated_state() const override { return UpdatedState::interest; }
    double predict_proba(const models::LearnerModel&, const models::EventModel&) const override;

protected:
    void do_fit(models::LearnerModel&, const models::EventModel&,
                models::EngagementLabel) override;
};

/// Ensemble over interest, novelty and knowledge: a probability mixture with
/// per-learner multiplicative-weights updates.
class InkClassifier final : public Classifier {
public:
    explicit InkClassifier(ClassifierParams params);
    std::string_view name() const override { return "ink"; }
    UpdatedState updated_state() const override { return UpdatedState::knowledge_and_interest; }
    double predict_proba(const models::LearnerModel&, const models::EventModel&) const override;

    /// Current mixture weights (interest, novelty, knowledge); sums to 1.
    const std::array<double, 3>& weights() const { return weights_; }
    void set_weights(const std::array<double, 3>& weights);

protected:
    void do_fit(models::LearnerModel&, const models::EventModel&,
                models::EngagementLabel) override;

private:
    InterestClassifier interest_;
    NoveltyClassifier novelty_;
    KnowledgeClassifier knowledge_;
    std::array<double, 3> weights_;
};

/// Known model names: engage, majority, persistence, interest, novelty,
/// knowledge, ink. Throws ValueError for anything else.
std::unique_ptr<Classifier> make_classifier(std::string_view model, ClassifierParams params);

bool is_known_model(std::string_view model);

} // namespace openlearner::learning
