#include "rfaug/corpus_io.hpp"
#include "rfaug/error.hpp"
#include "rfaug/fingerprint_sim.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace rfaug;
using namespace rfaug::sim;

namespace {

std::filesystem::path temp_file(const std::string& name)
{
    return std::filesystem::temp_directory_path() / name;
}

std::vector<char> read_bytes(const std::filesystem::path& p)
{
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

} // namespace

TEST_CASE("base preamble is periodic, fixed and unit peak")
{
    const auto v = base_preamble();
    REQUIRE(v.size() == 256);
    for (std::size_t k = 0; k + 16 < 256; ++k)
        CHECK(v[k] == v[k + 16]);
    CHECK(base_preamble() == v);
    double peak = 0.0;
    for (const auto& x : v)
        peak = std::max(peak, std::abs(x));
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("identity impairment chain leaves the waveform unchanged")
{
    Rng rng(1);
    const auto x = base_preamble();
    CHECK(apply_impairments(x, TransmitterProfile::identity(), rng) == x);
}

TEST_CASE("cfo of a quarter cycle rotates sample 1 to j")
{
    Rng rng(1);
    auto p = TransmitterProfile::identity();
    p.cfo = 0.25;
    const Waveform ones(8, cplx{1.0, 0.0});
    const auto y = apply_impairments(ones, p, rng);
    CHECK(y[0].real() == doctest::Approx(1.0));
    CHECK(std::abs(y[1] - cplx{0.0, 1.0}) < 1e-12);
}

TEST_CASE("cubic PA term compresses unit amplitude to 0.9")
{
    Rng rng(1);
    auto p = TransmitterProfile::identity();
    p.pa_a3 = -0.1;
    const Waveform ones(16, cplx{1.0, 0.0});
    for (const auto& v : apply_impairments(ones, p, rng))
        CHECK(std::abs(v - cplx{0.9, 0.0}) < 1e-12);
}

TEST_CASE("pathological PA coefficients report impairment overflow")
{
    Rng rng(1);
    auto p = TransmitterProfile::identity();
    p.pa_a3 = -0.08;
    const Waveform huge(4, cplx{1e154, 1e154});
    CHECK_THROWS_WITH_AS(apply_impairments(huge, p, rng), "impairment overflow", Error);
}

TEST_CASE("noiseless awgn channel is the identity")
{
    Rng rng(2);
    ChannelConfig ch;
    ch.snr_db = 250.0;
    const auto x = base_preamble();
    CHECK(apply_channel(x, ch, rng) == x);
}

TEST_CASE("awgn at 0 dB adds unit noise power")
{
    Rng rng(3);
    ChannelConfig ch;
    ch.snr_db = 0.0;
    const Waveform x(100000, cplx{1.0, 0.0});
    const auto y = apply_channel(x, ch, rng);
    double noise = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n)
        noise += std::norm(y[n] - x[n]);
    noise /= static_cast<double>(x.size());
    CHECK(std::abs(noise - 1.0) < 0.05);
}

TEST_CASE("block fading applies one gain per packet")
{
    for (auto model : {ChannelModel::rayleigh_block, ChannelModel::rician_block}) {
        Rng rng(4);
        ChannelConfig ch{model, 300.0, 6.0};
        const auto x = base_preamble();
        const auto y = apply_channel(x, ch, rng);
        const cplx h = y[0] / x[0];
        for (std::size_t n = 1; n < x.size(); ++n)
            CHECK(std::abs(y[n] / x[n] - h) < 1e-12);
    }
}

TEST_CASE("population synthesis")
{
    CHECK(synth_population(5, 7) == synth_population(5, 7));
    CHECK(synth_population(5, 7) != synth_population(5, 8));

    const auto pop = synth_population(40, 1);
    std::set<std::uint16_t> ids;
    for (const auto& p : pop)
        ids.insert(p.tx_id);
    CHECK(ids.size() == 40);
    CHECK(*ids.begin() == 0);
    CHECK(*ids.rbegin() == 39);

    for (const auto& p : synth_population(2, 3)) {
        CHECK_NOTHROW(p.validate());
        CHECK(std::abs(p.iq_gain_imbalance) <= 0.15);
        CHECK(std::abs(p.cfo) <= 0.003);
        CHECK(p.phase_noise_std <= 0.02);
        CHECK(std::abs(p.dc_offset) <= 0.03);
    }
    CHECK_THROWS_WITH_AS(synth_population(0, 1), "empty population", ConfigError);
}

TEST_CASE("corpus generation counts, normalization and determinism")
{
    CorpusConfig cfg;
    cfg.packets_min = cfg.packets_max = 10;
    cfg.seed = 5;
    const auto one = generate_corpus(synth_population(1, 5), cfg);
    CHECK(one.size() == 10);
    for (const auto& s : one.samples)
        CHECK(s.tx_id == 0);

    cfg.packets_min = 100;
    cfg.packets_max = 300;
    const auto pop = synth_population(40, 5);
    const auto c = generate_corpus(pop, cfg);
    CHECK(c.size() >= 4000);
    CHECK(c.size() <= 12000);
    float peak = 0.0f;
    for (const auto& s : c.samples) {
        CHECK(s.sample.all_finite());
        peak = std::max(peak, s.sample.max_abs());
    }
    CHECK(peak == 1.0f);
    for (const auto& [id, n] : c.counts()) {
        CHECK(n >= 100);
        CHECK(n <= 300);
    }
    CHECK(generate_corpus(pop, cfg) == c);

    const auto a = temp_file("rfaug_det_a.orff"), b = temp_file("rfaug_det_b.orff");
    save_corpus(c, a);
    save_corpus(generate_corpus(pop, cfg), b);
    CHECK(read_bytes(a) == read_bytes(b));
    CHECK(read_bytes(manifest_path(a)) == read_bytes(manifest_path(b)));

    cfg.packets_min = 400;
    CHECK_THROWS_AS(generate_corpus(pop, cfg), ConfigError);
}

TEST_CASE("identity transmitter on a noiseless channel reproduces the preamble")
{
    CorpusConfig cfg;
    cfg.packets_min = cfg.packets_max = 3;
    cfg.channel.snr_db = 300.0;
    const auto c = generate_corpus({TransmitterProfile::identity()}, cfg);
    // Only the corpus-wide normalization separates the output from the preamble.
    const double scale = c.manifest.at("normalization_scale").get<double>();
    CHECK(scale == doctest::Approx(std::sqrt(2.0)));
    auto w = base_preamble();
    for (auto& v : w)
        v *= scale;
    const auto expect = to_sample(w);
    for (const auto& s : c.samples)
        CHECK(s.sample == expect);
}

TEST_CASE("corpus files round trip and detect damage")
{
    CorpusConfig cfg;
    cfg.packets_min = 5;
    cfg.packets_max = 9;
    cfg.seed = 11;
    const auto c = generate_corpus(synth_population(4, 11), cfg);
    const auto path = temp_file("rfaug_roundtrip.orff");
    save_corpus(c, path);
    CHECK(load_corpus(path) == c);

    SUBCASE("truncated file")
    {
        std::filesystem::resize_file(path, std::filesystem::file_size(path) - 100);
        CHECK_THROWS_WITH_AS(load_corpus(path), doctest::Contains("corrupt corpus at offset"), Error);
    }
    SUBCASE("manifest count edited")
    {
        std::ifstream ms(manifest_path(path));
        auto side = nlohmann::json::parse(ms);
        ms.close();
        side["sample_count"] = c.size() + 1;
        std::ofstream(manifest_path(path)) << side.dump();
        CHECK_THROWS_WITH_AS(load_corpus(path), doctest::Contains("manifest mismatch"), Error);
    }
    SUBCASE("per-transmitter count edited")
    {
        std::ifstream ms(manifest_path(path));
        auto side = nlohmann::json::parse(ms);
        ms.close();
        side["per_tx_counts"]["0"] = 1;
        std::ofstream(manifest_path(path)) << side.dump();
        CHECK_THROWS_WITH_AS(load_corpus(path), doctest::Contains("manifest mismatch"), Error);
    }
}

TEST_CASE("outlier corpora use the reserved id")
{
    const std::vector<SignalSample> gen(3);
    const auto c = make_outlier_corpus(gen, {{"method", "ellipsoid"}});
    const auto path = temp_file("rfaug_outliers.orff");
    save_corpus(c, path);
    const auto back = load_corpus(path);
    CHECK(back == c);
    for (const auto& s : back.samples)
        CHECK(s.tx_id == outlier_tx_id);
}
