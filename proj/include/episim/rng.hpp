#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>

namespace episim {

/// SplitMix64 finalizer. Stable across platforms and releases.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of replica `index` under `master`:
///   splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15).
/// Part of the reproducibility contract of the CLI; do not change.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Random source for one replica.
///
/// Wraps std::mt19937_64 (whose output sequence is fixed by the standard) and
/// does its own variate transforms, so that draws are bit-identical across
/// standard library implementations.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Exponential with the given rate (> 0).
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform index in [0, n), n > 0.
    std::size_t index(std::size_t n)
    {
        auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    /// Number of failures before the first success of Bernoulli(p) trials.
    /// Saturates at `cap` to protect against overflow when p is tiny.
    std::uint64_t geometric_skip(double p, std::uint64_t cap);

private:
    std::mt19937_64 engine_;
};

} // namespace episim
