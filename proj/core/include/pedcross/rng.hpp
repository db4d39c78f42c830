#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pedcross {

/// Deterministic random stream. Wraps std::mt19937_64 but draws uniforms and
/// normals through fixed mappings, so a stream is reproducible call-by-call:
/// every normal() consumes exactly two engine outputs, every uniform() one.
/// Substreams derived from the same root seed are independent and stable
/// across worker counts, which the reproducibility contract relies on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

    /// Next raw 64-bit value (used to derive per-episode seeds).
    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Requires n > 0.
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    /// Standard normal via Box-Muller, one value per call (no cached spare).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();  // guard log(0)
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Independent stream derived from a root seed and a stream index.
    static Rng substream(std::uint64_t root_seed, std::uint64_t index) {
        return Rng(mix(root_seed) ^ mix(index + 0x9e3779b97f4a7c15ULL));
    }

private:
    // splitmix64 finalizer; decorrelates small consecutive seeds.
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace pedcross
