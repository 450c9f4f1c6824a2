#pragma once

#include <cstdint>
#include <random>

namespace gs1mc {

using Rng = std::mt19937_64;

/// Stateless 64-bit mixer (SplitMix64 finalizer).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent, reproducible seed for sub-stream `stream` of run seed `root`.
std::uint64_t stream_seed(std::uint64_t root, std::uint64_t stream) noexcept;

inline Rng make_rng(std::uint64_t root, std::uint64_t stream) { return Rng(stream_seed(root, stream)); }

/// Named sub-streams. Values are part of the reproducibility contract; never renumber.
namespace streams {
inline constexpr std::uint64_t synth_latent = 1;
inline constexpr std::uint64_t synth_noise = 2;
inline constexpr std::uint64_t synth_mask = 3;
inline constexpr std::uint64_t split = 4;
inline constexpr std::uint64_t factor_init = 5;
inline constexpr std::uint64_t group_init = 6;
inline constexpr std::uint64_t clustering = 7;
inline constexpr std::uint64_t genre_kmeans = 8;
}  // namespace streams

}  // namespace gs1mc
