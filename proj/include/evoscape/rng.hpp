#pragma once

#include <cstdint>
#include <random>

namespace evoscape {

using Rng = std::mt19937_64;

/// SplitMix64 step. Used only to mix seeds for independent substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Derives a substream seed from a base seed and up to three indices.
/// The mapping is stable: the same tuple always yields the same seed,
/// independent of evaluation order, so parallel consumers stay
/// reproducible.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = base;
    std::uint64_t h = splitmix64(s);
    s ^= a + 0x9E3779B97F4A7C15ull;
    h ^= splitmix64(s);
    s ^= b + 0xD1B54A32D192ED03ull;
    h ^= splitmix64(s);
    s ^= c + 0x8CB92BA72F3D8DD7ull;
    h ^= splitmix64(s);
    return h;
}

// Stream purposes, used as the first index when deriving per-step
// substreams inside a walk or an experiment run.
namespace stream {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kMutation = 2;
inline constexpr std::uint64_t kSelection = 3;
inline constexpr std::uint64_t kArchive = 4;
inline constexpr std::uint64_t kMarkov = 5;
} // namespace stream

} // namespace evoscape
