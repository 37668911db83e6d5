#pragma once

#include <limits>

#include "openlearner/errors.hpp"

namespace openlearner::bayes {

/// One-dimensional Gaussian belief, stored in precision space so that the
/// uninformative belief (infinite variance) needs no special-cased infinities.
///
/// precision       pi  = 1 / variance
/// precision mean  tau = mean / variance
///
/// pi == 0 is the uninformative belief. Negative precision is an improper
/// belief; the arithmetic operators are closed over it because expectation
/// propagation produces improper messages transiently, but callers must not
/// expose improper beliefs.
class Gaussian {
public:
    constexpr Gaussian() = default;

    static Gaussian from_mean_variance(double mean, double variance);
    static constexpr Gaussian from_precision(double precision, double precision_mean) {
        Gaussian g;
        g.pi_ = precision;
        g.tau_ = precision_mean;
        return g;
    }
    static constexpr Gaussian uninformative() { return Gaussian{}; }

    double mean() const { return pi_ == 0.0 ? 0.0 : tau_ / pi_; }
    double variance() const {
        return pi_ == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / pi_;
    }
    double precision() const { return pi_; }
    double precision_mean() const { return tau_; }

    bool proper() const { return pi_ > 0.0; }
    bool uninformative_belief() const { return pi_ == 0.0; }

    friend bool operator==(const Gaussian& a, const Gaussian& b) {
        return a.pi_ == b.pi_ && a.tau_ == b.tau_;
    }

private:
    double pi_ = 0.0;
    double tau_ = 0.0;
};

/// Gaussian density product: precisions and precision means add.
Gaussian multiply(const Gaussian& a, const Gaussian& b);

/// Gaussian density ratio: the inverse of multiply. A result with zero
/// precision collapses to the uninformative belief.
Gaussian divide(const Gaussian& a, const Gaussian& b);

inline Gaussian operator*(const Gaussian& a, const Gaussian& b) { return multiply(a, b); }
inline Gaussian operator/(const Gaussian& a, const Gaussian& b) { return divide(a, b); }

/// Standard normal density.
double normal_pdf(double z);

/// Standard normal CDF, accurate in both tails.
double normal_cdf(double z);

/// log of the standard normal CDF; usable far into the lower tail where the
/// CDF itself underflows.
double log_normal_cdf(double z);

/// Phi((x - mean) / sigma) for a proper belief.
double cdf(double x, const Gaussian& g);

/// Inverse of normal_cdf on (0, 1).
double inverse_normal_cdf(double p);

// Correction functions for truncated-Gaussian moment matching. `t` is the
// standardized surplus (mean - threshold) / sigma and `margin` the
// standardized half-width. The conditioned posterior is
//   mean     += sigma * v(t, margin)
//   variance *= 1 - w(t, margin)
// v_greater/w_greater condition on exceeding threshold + margin;
// v_within/w_within condition on landing within +/- margin of the threshold.
double v_greater(double t, double margin);
double w_greater(double t, double margin);
double v_within(double t, double margin);
double w_within(double t, double margin);

enum class TruncationMode {
    greater, ///< condition on x > threshold + margin
    within,  ///< condition on |x - threshold| <= margin
};

/// Moment-matched Gaussian of `prior` conditioned on the truncation event.
/// Throws ModelError when the event has survival probability below 1e-300,
/// i.e. the observation is impossible under the model.
Gaussian truncate(const Gaussian& prior, double threshold, double margin, TruncationMode mode);

} // namespace openlearner::bayes
