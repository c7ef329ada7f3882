#pragma once

// Deterministic random number generation.
//
// Everything stochastic in contrail flows through Rng so that a (seed,
// call-sequence) pair reproduces bit-identically on any platform:
//
//   * engine: std::mt19937_64 (output sequence fixed by the C++ standard)
//   * uniform doubles: top 53 bits of one 64-bit draw, value in [0, 1)
//   * gaussian: Marsaglia polar method, one value per call, the second
//     root of each accepted pair is discarded (no hidden cache state)
//   * bounded integers: rejection sampling, unbiased
//
// Seed derivation for independent streams uses FNV-1a 64-bit over
// (seed, tag, index); see derive_seed below. Both identifiers are echoed
// into run_config.txt by the harness.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace contrail {

inline constexpr std::string_view kRngAlgorithm = "mt19937_64+polar-box-muller";
inline constexpr std::string_view kSeedHashAlgorithm = "fnv1a64";

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1), 53 bits of precision.
    double next_unit() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    /// Standard normal via the polar method; log/sqrt only, no trig.
    double gaussian(double mean, double stddev) {
        double u, v, s;
        do {
            u = 2.0 * next_unit() - 1.0;
            v = 2.0 * next_unit() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        return mean + stddev * (u * std::sqrt(-2.0 * std::log(s) / s));
    }

    /// Unbiased integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = gen_();
            if (r >= threshold) return r % n;
        }
    }

private:
    std::mt19937_64 gen_;
};

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t hash = 0xcbf29ce484222325ull) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ull;
    }
    return hash;
}

/// Stable stream-splitting hash: fnv1a64 over seed (8 bytes LE), the tag
/// bytes, then index (8 bytes LE). Used wherever one seed has to spawn
/// several independent deterministic streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                 std::uint64_t index = 0) {
    unsigned char le[8];
    for (int i = 0; i < 8; ++i) le[i] = static_cast<unsigned char>(seed >> (8 * i));
    std::uint64_t h = fnv1a64(le, 8);
    h = fnv1a64(tag.data(), tag.size(), h);
    for (int i = 0; i < 8; ++i) le[i] = static_cast<unsigned char>(index >> (8 * i));
    return fnv1a64(le, 8, h);
}

} // namespace contrail
