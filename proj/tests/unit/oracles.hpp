#pragma once

// Independent numerical oracles for the test suite. Deliberately built on
// different algorithms than the library: quadrature instead of closed-form
// correction functions, a series/continued-fraction CDF instead of erfc.

namespace openlearner::test_oracles {

struct TruncatedMoments {
    double mean;
    double variance;
    double mass;
};

/// Trapezoid integration of the standard normal restricted to x > lower.
TruncatedMoments truncated_above_std(double lower);

/// Trapezoid integration of the standard normal restricted to [lower, upper].
TruncatedMoments truncated_interval_std(double lower, double upper);

/// Standard normal CDF via Marsaglia's series (small |x|) and a Lentz
/// continued fraction for the tail, evaluated in long double.
double normal_cdf_series(double x);

} // namespace openlearner::test_oracles
