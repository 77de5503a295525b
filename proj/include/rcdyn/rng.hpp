#pragma once

#include <cstdint>
#include <random>

namespace rcdyn {

// splitmix64, used to decorrelate (seed, stream) pairs before seeding the engine
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic RNG stream: identical (seed, stream) always yields the same sequence,
// independent of any other stream. Used to parallelize sampling reproducibly.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : engine_(mix64(mix64(seed) ^ mix64(stream + 0x5851f42d4c957f2dULL))) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    // index in [0, n)
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    // index drawn from a finite distribution given by cumulative weights summing to ~1
    std::size_t categorical(const std::vector<double>& cumulative) {
        const double u = uniform();
        for (std::size_t i = 0; i + 1 < cumulative.size(); ++i)
            if (u < cumulative[i]) return i;
        return cumulative.size() - 1;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

inline std::vector<double> cumulative_weights(const std::vector<double>& w) {
    std::vector<double> c(w.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        c[i] = acc;
    }
    return c;
}

}  // namespace rcdyn
