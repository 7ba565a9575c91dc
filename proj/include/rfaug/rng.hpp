// rfaug/rng.hpp
//
// Seeded random streams. Every consumer derives its own substream from
// (seed, stream id) so that parallel work is bit-identical to sequential work.

#pragma once

#include <cstdint>
#include <random>

namespace rfaug {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng substream(std::uint64_t seed, std::uint64_t stream)
{
    return Rng{derive_seed(seed, stream)};
}

// Stream ids used across the library, kept in one place so two consumers
// never share a substream by accident.
namespace stream {
inline constexpr std::uint64_t population = 1;
inline constexpr std::uint64_t corpus = 2;        // + tx_id * 16
inline constexpr std::uint64_t split = 3;
inline constexpr std::uint64_t init = 4;
inline constexpr std::uint64_t shuffle = 5;
inline constexpr std::uint64_t reparam = 6;
inline constexpr std::uint64_t sample = 7;
inline constexpr std::uint64_t shell = 8;
inline constexpr std::uint64_t latent = 9;
inline constexpr std::uint64_t selection = 10; // transmitter roles in sweeps
} // namespace stream

} // namespace rfaug
