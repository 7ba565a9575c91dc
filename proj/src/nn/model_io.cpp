#include "rfaug/model_io.hpp"

#include "rfaug/byte_io.hpp"
#include "rfaug/error.hpp"

#include <fstream>
#include <string>

namespace rfaug::nn {

void save_params(const std::filesystem::path& path, std::uint64_t spec_hash, std::span<const float> params)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw Error("cannot write " + path.string());
    os.write("ORNN", 4);
    io::put<std::uint64_t>(os, spec_hash);
    io::put<std::uint64_t>(os, params.size());
    for (float v : params)
        io::put<float>(os, v);
    if (!os)
        throw Error("write failed: " + path.string());
}

std::vector<float> load_params(const std::filesystem::path& path, std::uint64_t spec_hash,
                               std::size_t expected_count)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error("cannot read " + path.string());
    char magic[4];
    std::uint64_t hash = 0, count = 0;
    if (!is.read(magic, 4) || std::string(magic, 4) != "ORNN" || !io::get(is, hash) || !io::get(is, count))
        throw Error("corrupt parameter file " + path.string());
    if (hash != spec_hash)
        throw Error("spec hash mismatch in " + path.string() + ": file was written for a different network");
    if (count != expected_count)
        throw Error("parameter count mismatch in " + path.string() + ": " + std::to_string(count) + " vs " +
                    std::to_string(expected_count));
    std::vector<float> params(count);
    for (auto& v : params)
        if (!io::get(is, v))
            throw Error("corrupt parameter file " + path.string() + ": truncated");
    return params;
}

std::uint64_t combine_hashes(std::span<const std::uint64_t> hashes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto x : hashes)
        for (int i = 0; i < 8; ++i) {
            h ^= (x >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    return h;
}

} // namespace rfaug::nn
