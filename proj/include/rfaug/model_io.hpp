// rfaug/model_io.hpp
//
// ORNN parameter files, little-endian:
//   "ORNN" | spec hash u64 | parameter count u64 | count x float32
// Loading refuses a file whose hash or count disagrees with the network.

#pragma once

#include "rfaug/network.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace rfaug::nn {

void save_params(const std::filesystem::path& path, std::uint64_t spec_hash, std::span<const float> params);
std::vector<float> load_params(const std::filesystem::path& path, std::uint64_t spec_hash,
                               std::size_t expected_count);

inline void save_params(const std::filesystem::path& path, const Network& net, std::span<const float> params)
{
    save_params(path, net.spec_hash(), params);
}
inline std::vector<float> load_params(const std::filesystem::path& path, const Network& net)
{
    return load_params(path, net.spec_hash(), net.param_count());
}

// Combines several network hashes into one, order-sensitive.
std::uint64_t combine_hashes(std::span<const std::uint64_t> hashes);

} // namespace rfaug::nn
