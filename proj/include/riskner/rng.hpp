#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace riskner {

/// Deterministic 64-bit split-mix generator. This is the one PRNG used for
/// everything seed-dependent in the pipeline (corpus shuffling, weight init,
/// dropout masks) so that results are reproducible across platforms and
/// reimplementable from this definition alone:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   output = z ^ (z >> 31)
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1): top 53 bits scaled by 2^-53.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Modulo reduction; the bias is negligible for
    /// the corpus sizes involved and keeps the mapping trivially portable.
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

    /// Standard normal via Box-Muller (fresh pair per call, second value
    /// discarded so the draw sequence stays position-independent).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        // Guard the log; uniform() can return exactly 0.
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

  private:
    std::uint64_t state_;
};

/// One stateless draw: the value SplitMix64(seed) would produce first.
inline std::uint64_t splitmix64_at(std::uint64_t seed) {
    return SplitMix64(seed).next();
}

/// Random access into the SplitMix64 stream: element i of SplitMix64(seed).
/// Lets counter-indexed consumers (dropout masks) evaluate positions in any
/// order, including in parallel, with identical results.
inline std::uint64_t splitmix64_element(std::uint64_t seed, std::uint64_t i) {
    std::uint64_t z = seed + (i + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline double uniform_from_bits(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Derives an independent stream seed from (seed, tag). Used to give each
/// consumer (shuffle, init, dropout, ...) its own stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64_at(seed ^ (0x9E3779B97F4A7C15ULL * (tag + 1)));
}

/// Seeded Fisher-Yates shuffle of 0..n-1 (descending index, j = below(i+1)).
inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    SplitMix64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace riskner
