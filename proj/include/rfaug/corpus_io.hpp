// rfaug/corpus_io.hpp
//
// ORFF corpus files, little-endian:
//
//   "ORFF" | version u16 | sample count u32 | tx count u16
//   per sample: tx_id u16 | 512 x float32 (256x2, row-major)
//
// A JSON sidecar at <path>.json carries the generation manifest, the
// transmitter profiles and the per-transmitter sample counts. Outlier sets
// use tx_id 65535 and have no profiles.

#pragma once

#include "rfaug/signal.hpp"

#include <filesystem>

namespace rfaug {

inline constexpr std::uint16_t corpus_format_version = 1;

std::filesystem::path manifest_path(const std::filesystem::path& corpus_path);

void save_corpus(const Corpus& c, const std::filesystem::path& path);

// Throws Error("corrupt corpus at offset N: ...") on a malformed file and
// Error("manifest mismatch: ...") when the sidecar disagrees with the data.
Corpus load_corpus(const std::filesystem::path& path);

// Wraps generated samples as an outlier corpus (tx_id 65535).
Corpus make_outlier_corpus(const std::vector<SignalSample>& samples, nlohmann::json manifest);

} // namespace rfaug
