#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace pimbrl {

/// Mixes a base seed with a stream id so that independent subsystems
/// (environment, agent, model, evaluation) draw from unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    // splitmix64 finalizer applied to the combined word
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream. All distributions are implemented by hand on
/// top of mt19937_64 so that sequences are identical across platforms and
/// standard-library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Uniform integer on [0, n).
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(gen_() % n);
    }

    /// Standard normal via Box-Muller (one value per call, no caching so the
    /// stream state is a pure function of the call count).
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace pimbrl
