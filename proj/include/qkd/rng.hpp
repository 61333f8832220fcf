#ifndef QKD_RNG_HPP
#define QKD_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace qkd {

// Deterministic counter-derived random streams.  Simulation rounds draw from
// independent streams keyed by (seed, round index), so the generated records
// are a pure function of the run configuration and do not depend on thread
// scheduling.  The generator is SplitMix64; Gaussians come from Box-Muller on
// the raw uniforms so the byte stream is independent of any standard-library
// distribution internals.

class Rng {
public:
    explicit Rng(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in (0, 1].
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform integer in {0, ..., 3}.
    int uniform4() { return static_cast<int>(next_u64() & 3u); }

    /// Uniform bit.
    int uniform_bit() { return static_cast<int>(next_u64() & 1u); }

    /// Standard normal deviate.  Consumes exactly two uniforms per call.
    double gaussian() {
        double u1 = uniform01();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    double gaussian(double mean, double stddev) {
        return mean + stddev * gaussian();
    }

private:
    std::uint64_t state_;
};

/// Stream for one simulation round: the round's initial state is the
/// round_index-th output of a SplitMix64 sequence started at `seed`.
inline Rng round_rng(std::uint64_t seed, std::uint64_t round_index) {
    Rng base(seed + round_index * 0x9E3779B97F4A7C15ULL);
    return Rng(base.next_u64());
}

} // namespace qkd

#endif
