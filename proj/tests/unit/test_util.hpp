#pragma once

#include <cstdint>
#include <random>

namespace openlearner::test_util {

/// Deterministic uniform source built directly on mt19937_64 raw output so
/// results do not depend on the standard library's distribution
/// implementations.
struct Rng {
    explicit Rng(std::uint64_t seed = 20230517) : gen(seed) {}

    double uniform(double lo, double hi) {
        const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * unit;
    }

    std::int64_t integer(std::int64_t lo, std::int64_t hi) { // inclusive bounds
        return lo + static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    std::mt19937_64 gen;
};

} // namespace openlearner::test_util
