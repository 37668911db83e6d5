#include "openlearner/gaussian.hpp"

#include <cmath>
#include <string>

namespace openlearner::bayes {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kLogSqrt2Pi = 0.9189385332046727;
// Survival probabilities below this are treated as impossible observations.
constexpr double kMinSurvival = 1e-300;
constexpr double kLogMinSurvival = -690.7755278982137; // log(1e-300)

// log(erfc(x)) without underflow. erfc itself is accurate down to ~1e-308;
// past that switch to the asymptotic expansion
//   erfc(x) = exp(-x^2) / (x sqrt(pi)) * (1 - 1/(2x^2) + 3/(4x^4) - ...)
double log_erfc(double x) {
    if (x < 25.0) {
        return std::log(std::erfc(x));
    }
    const double x2 = x * x;
    const double series = 1.0 - 0.5 / x2 + 0.75 / (x2 * x2) - 1.875 / (x2 * x2 * x2);
    return -x2 - std::log(x) - 0.5723649429247001 /* log(sqrt(pi)) */ + std::log(series);
}

} // namespace

Gaussian Gaussian::from_mean_variance(double mean, double variance) {
    if (std::isnan(mean) || std::isnan(variance) || variance <= 0.0) {
        throw ValueError("Gaussian requires finite mean and variance > 0, got mean=" +
                         std::to_string(mean) + " variance=" + std::to_string(variance));
    }
    if (std::isinf(variance)) {
        return uninformative();
    }
    if (std::isinf(mean)) {
        throw ValueError("Gaussian mean must be finite");
    }
    return from_precision(1.0 / variance, mean / variance);
}

Gaussian multiply(const Gaussian& a, const Gaussian& b) {
    return Gaussian::from_precision(a.precision() + b.precision(),
                                    a.precision_mean() + b.precision_mean());
}

Gaussian divide(const Gaussian& a, const Gaussian& b) {
    const double pi = a.precision() - b.precision();
    if (pi == 0.0) {
        return Gaussian::uninformative();
    }
    return Gaussian::from_precision(pi, a.precision_mean() - b.precision_mean());
}

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z - kLogSqrt2Pi);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / kSqrt2);
}

double log_normal_cdf(double z) {
    if (z > -1.0) {
        return std::log(normal_cdf(z));
    }
    return std::log(0.5) + log_erfc(-z / kSqrt2);
}

double cdf(double x, const Gaussian& g) {
    if (!g.proper()) {
        throw ModelError("cdf requires a proper belief");
    }
    return normal_cdf((x - g.mean()) / std::sqrt(g.variance()));
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw ValueError("inverse_normal_cdf requires p in (0, 1)");
    }
    // Acklam's rational approximation, then one Newton step against the
    // accurate CDF to reach close to machine precision.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double err = normal_cdf(x) - p;
    x -= err / normal_pdf(x);
    return x;
}

double v_greater(double t, double margin) {
    const double d = t - margin;
    const double log_cdf = log_normal_cdf(d);
    if (log_cdf < kLogMinSurvival) {
        throw ModelError("truncation event has vanishing probability (t=" + std::to_string(t) +
                         ", margin=" + std::to_string(margin) + ")");
    }
    // Tail ratio in log space keeps the result accurate deep in the tail.
    return std::exp(-0.5 * d * d - kLogSqrt2Pi - log_cdf);
}

double w_greater(double t, double margin) {
    const double v = v_greater(t, margin);
    return v * (v + t - margin);
}

namespace {

// Mass, mean and variance terms of the standard normal restricted to
// [-margin - |t|, margin - |t|]; shared by v_within / w_within.
struct WithinTerms {
    double mass;        // Phi(beta) - Phi(alpha)
    double mean;        // E[u | u in interval], for t >= 0
    double second;      // (beta phi(beta) - alpha phi(alpha)) / mass
    bool degenerate_narrow; // interval so narrow the midpoint expansion was used
};

WithinTerms within_terms(double t_abs, double margin) {
    WithinTerms out{};
    const double alpha = -margin - t_abs;
    const double beta = margin - t_abs;
    // Very narrow interval: direct evaluation cancels catastrophically, use
    // the midpoint expansion of the truncated moments instead.
    if (margin < 1e-8 * (1.0 + t_abs)) {
        const double mid = -t_abs;
        out.mass = 2.0 * margin * normal_pdf(mid);
        out.mean = mid * (1.0 - margin * margin / 3.0);
        out.degenerate_narrow = true;
        return out;
    }
    const double cdf_beta = normal_cdf(beta);
    const double cdf_alpha = normal_cdf(alpha);
    out.mass = cdf_beta - cdf_alpha;
    if (out.mass < kMinSurvival) {
        return out; // caller raises
    }
    const double pdf_alpha = normal_pdf(alpha);
    const double pdf_beta = normal_pdf(beta);
    out.mean = (pdf_alpha - pdf_beta) / out.mass;
    out.second = (beta * pdf_beta - alpha * pdf_alpha) / out.mass;
    return out;
}

void check_within_mass(const WithinTerms& terms, double t, double margin) {
    if (!(terms.mass >= kMinSurvival)) {
        throw ModelError("draw event has vanishing probability (t=" + std::to_string(t) +
                         ", margin=" + std::to_string(margin) + ")");
    }
}

} // namespace

double v_within(double t, double margin) {
    if (std::isinf(margin)) {
        return 0.0;
    }
    const double t_abs = std::fabs(t);
    const WithinTerms terms = within_terms(t_abs, margin);
    check_within_mass(terms, t, margin);
    // odd in t
    return t < 0.0 ? -terms.mean : terms.mean;
}

double w_within(double t, double margin) {
    if (std::isinf(margin)) {
        return 0.0;
    }
    const double t_abs = std::fabs(t);
    const WithinTerms terms = within_terms(t_abs, margin);
    check_within_mass(terms, t, margin);
    if (terms.degenerate_narrow) {
        // variance of the conditioned variable collapses to margin^2 / 3
        return 1.0 - margin * margin / 3.0;
    }
    // Var[u | interval] = 1 - second - mean^2 = 1 - w
    return terms.mean * terms.mean + terms.second;
}

Gaussian truncate(const Gaussian& prior, double threshold, double margin, TruncationMode mode) {
    if (!prior.proper()) {
        throw ModelError("truncate requires a proper prior belief");
    }
    if (std::isnan(margin) || margin < 0.0) {
        throw ValueError("truncation margin must be >= 0");
    }
    const double sigma = std::sqrt(prior.variance());
    const double t = (prior.mean() - threshold) / sigma;
    const double eps = margin / sigma;

    double v = 0.0;
    double w = 0.0;
    if (mode == TruncationMode::greater) {
        v = v_greater(t, eps);
        w = w_greater(t, eps);
    } else {
        if (std::isinf(eps)) {
            return prior; // conditioning on a sure event
        }
        v = v_within(t, eps);
        w = w_within(t, eps);
    }
    const double post_mean = prior.mean() + sigma * v;
    const double post_var = prior.variance() * (1.0 - w);
    if (!(post_var > 0.0) || !std::isfinite(post_mean)) {
        throw ModelError("truncation produced a degenerate posterior");
    }
    return Gaussian::from_mean_variance(post_mean, post_var);
}

} // namespace openlearner::bayes
