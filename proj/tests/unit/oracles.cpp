#include "oracles.hpp"

#include <cmath>

namespace openlearner::test_oracles {

namespace {

constexpr long double kSqrt2PiL = 2.50662827463100050241576528481104525L;

long double phi(long double x) { return std::exp(-0.5L * x * x) / kSqrt2PiL; }

// integrate f over [a, b] with n trapezoids
template <typename F>
long double trapezoid(F f, long double a, long double b, int n) {
    const long double h = (b - a) / n;
    long double sum = 0.5L * (f(a) + f(b));
    for (int i = 1; i < n; ++i) {
        sum += f(a + h * i);
    }
    return sum * h;
}

TruncatedMoments moments_on(long double a, long double b) {
    constexpr int kSteps = 400000;
    const long double mass = trapezoid([](long double x) { return phi(x); }, a, b, kSteps);
    const long double m1 = trapezoid([](long double x) { return x * phi(x); }, a, b, kSteps) / mass;
    const long double m2 =
        trapezoid([](long double x) { return x * x * phi(x); }, a, b, kSteps) / mass;
    return {static_cast<double>(m1), static_cast<double>(m2 - m1 * m1),
            static_cast<double>(mass)};
}

} // namespace

TruncatedMoments truncated_above_std(double lower) {
    // the conditional density is negligible 20 standard units past the bound
    const long double a = lower;
    const long double b = std::max<long double>(lower + 20.0L, 20.0L);
    return moments_on(a, b);
}

TruncatedMoments truncated_interval_std(double lower, double upper) {
    return moments_on(lower, upper);
}

double normal_cdf_series(double x) {
    if (x < 0.0) {
        return 1.0 - normal_cdf_series(-x);
    }
    if (x > 9.0) {
        // upper tail via the Lentz continued fraction for Mills' ratio:
        // Q(x) = phi(x) / (x + 1/(x + 2/(x + 3/(x + ...))))
        long double f = x;
        for (int k = 60; k >= 1; --k) {
            f = x + k / f;
        }
        return static_cast<double>(1.0L - phi(x) / f);
    }
    // Marsaglia's series: Phi(x) = 1/2 + phi(x) * sum x^(2k+1) / (2k+1)!!
    long double term = x;
    long double sum = x;
    for (int k = 1; k < 400; ++k) {
        term *= static_cast<long double>(x) * x / (2 * k + 1);
        sum += term;
        if (term < 1e-25L * sum) {
            break;
        }
    }
    return static_cast<double>(0.5L + phi(x) * sum);
}

} // namespace openlearner::test_oracles
