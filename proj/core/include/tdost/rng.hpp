#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace tdost {

/// Seeded generator whose draws are identical on every platform. mt19937_64's output sequence is
/// fixed by the standard; the library distributions and std::shuffle are not, so the
/// transformations used here are spelled out.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform integer in [0, n); n > 0.
    std::uint64_t below(std::uint64_t n);
    double normal(double mean, double stddev);
    /// Normal draw clamped into [lo, hi] by resampling (falls back to clamping after 64 tries).
    double truncated_normal(double mean, double stddev, double lo, double hi);
    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// Derives an independent stream seed from a base seed and a salt (splitmix64 finaliser).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace tdost
