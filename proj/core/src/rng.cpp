#include "tdost/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tdost {

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
}

double Rng::normal(double mean, double stddev) {
    // Box-Muller; one of the pair is discarded so the stream position stays simple.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + stddev * z;
}

double Rng::truncated_normal(double mean, double stddev, double lo, double hi) {
    for (int i = 0; i < 64; ++i) {
        const double x = normal(mean, stddev);
        if (x >= lo && x <= hi) return x;
    }
    return std::clamp(mean, lo, hi);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace tdost
