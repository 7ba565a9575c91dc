#include "rfaug/corpus_io.hpp"

#include "rfaug/byte_io.hpp"
#include "rfaug/error.hpp"

#include <fstream>
#include <map>

namespace rfaug {

namespace {

nlohmann::json count_map(const Corpus& c)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [id, n] : c.counts())
        j[std::to_string(id)] = n;
    return j;
}

[[noreturn]] void corrupt(std::istream& is, const std::string& what)
{
    is.clear();
    throw Error("corrupt corpus at offset " + std::to_string(static_cast<long long>(is.tellg())) + ": " + what);
}

} // namespace

std::filesystem::path manifest_path(const std::filesystem::path& corpus_path)
{
    auto p = corpus_path;
    p += ".json";
    return p;
}

void save_corpus(const Corpus& c, const std::filesystem::path& path)
{
    if (c.samples.size() > 0xffffffffULL)
        throw Error("corpus too large for the ORFF format");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw Error("cannot write " + path.string());
    os.write("ORFF", 4);
    io::put<std::uint16_t>(os, corpus_format_version);
    io::put<std::uint32_t>(os, static_cast<std::uint32_t>(c.samples.size()));
    io::put<std::uint16_t>(os, static_cast<std::uint16_t>(c.profiles.size()));
    for (const auto& s : c.samples) {
        io::put<std::uint16_t>(os, s.tx_id);
        for (float v : s.sample.iq)
            io::put<float>(os, v);
    }
    if (!os)
        throw Error("write failed: " + path.string());

    nlohmann::json side = {{"format", "ORFF"},
                           {"version", corpus_format_version},
                           {"sample_count", c.samples.size()},
                           {"tx_count", c.profiles.size()},
                           {"per_tx_counts", count_map(c)},
                           {"profiles", c.profiles},
                           {"manifest", c.manifest}};
    std::ofstream ms(manifest_path(path), std::ios::trunc);
    if (!ms)
        throw Error("cannot write " + manifest_path(path).string());
    ms << side.dump(2) << '\n';
}

Corpus load_corpus(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error("cannot read " + path.string());
    char magic[4];
    if (!is.read(magic, 4))
        corrupt(is, "short header");
    if (std::string(magic, 4) != "ORFF")
        corrupt(is, "bad magic");
    std::uint16_t version = 0, tx_count = 0;
    std::uint32_t count = 0;
    if (!io::get(is, version) || !io::get(is, count) || !io::get(is, tx_count))
        corrupt(is, "short header");
    if (version != corpus_format_version)
        corrupt(is, "unsupported version " + std::to_string(version));

    Corpus c;
    c.samples.resize(count);
    for (auto& s : c.samples) {
        if (!io::get(is, s.tx_id))
            corrupt(is, "truncated sample record");
        for (auto& v : s.sample.iq)
            if (!io::get(is, v))
                corrupt(is, "truncated sample record");
    }
    if (is.peek() != std::char_traits<char>::eof())
        corrupt(is, "trailing bytes");

    std::ifstream ms(manifest_path(path));
    if (!ms)
        throw Error("manifest mismatch: missing sidecar " + manifest_path(path).string());
    nlohmann::json side;
    try {
        side = nlohmann::json::parse(ms);
        c.profiles = side.at("profiles").get<std::vector<TransmitterProfile>>();
        c.manifest = side.at("manifest");
        if (side.at("sample_count").get<std::size_t>() != count)
            throw Error("manifest mismatch: sidecar lists " + side.at("sample_count").dump() + " samples, file has " +
                        std::to_string(count));
        if (side.at("tx_count").get<std::size_t>() != tx_count || c.profiles.size() != tx_count)
            throw Error("manifest mismatch: transmitter count differs from file header");
        if (side.at("per_tx_counts") != count_map(c))
            throw Error("manifest mismatch: per-transmitter counts differ from file contents");
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("manifest mismatch: unreadable sidecar: ") + e.what());
    }
    std::map<std::uint16_t, bool> known;
    for (const auto& p : c.profiles)
        known[p.tx_id] = true;
    for (const auto& s : c.samples)
        if (s.tx_id != outlier_tx_id && !known.count(s.tx_id))
            throw Error("manifest mismatch: tx " + std::to_string(s.tx_id) + " has no profile");
    return c;
}

Corpus make_outlier_corpus(const std::vector<SignalSample>& samples, nlohmann::json manifest)
{
    Corpus c;
    c.samples.reserve(samples.size());
    for (const auto& s : samples)
        c.samples.push_back({s, outlier_tx_id});
    c.manifest = std::move(manifest);
    return c;
}

} // namespace rfaug
