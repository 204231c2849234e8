#pragma once

#include <cstdint>
#include <random>

namespace econsim {

/// SplitMix64 finalizer; used to derive independent per-agent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t world_seed, std::uint64_t stream) {
    std::uint64_t z = world_seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seeded stream with platform-independent derived draws (the engine's bits are
/// fully specified by the standard; only the mapping to doubles is ours).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Always consumes exactly one draw, so stream alignment never depends on p.
    bool bernoulli(double p) { return uniform01() < p; }

    /// Uniform index in [0, n); n must be > 0.
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform01() * static_cast<double>(n)); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace econsim
