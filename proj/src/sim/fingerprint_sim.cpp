#include "rfaug/fingerprint_sim.hpp"

#include "rfaug/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rfaug::sim {

Waveform base_preamble()
{
    // mt19937's raw output is fixed by the standard, so the seed symbols are
    // identical on every platform.
    std::mt19937 bits(0x5eed1234u);
    const double a = 1.0 / std::numbers::sqrt2;
    std::array<cplx, 16> seq;
    for (auto& s : seq) {
        const auto r = bits();
        s = {(r & 1u) ? a : -a, (r & 2u) ? a : -a};
    }
    Waveform w(samples_per_packet);
    for (std::size_t n = 0; n < w.size(); ++n)
        w[n] = seq[n % seq.size()];
    return w;
}

Waveform apply_impairments(const Waveform& x, const TransmitterProfile& p, Rng& rng)
{
    const double eps = p.iq_gain_imbalance;
    const double phi = p.iq_phase_imbalance;
    const double cphi = std::cos(phi), sphi = std::sin(phi);
    std::normal_distribution<double> walk(0.0, 1.0);

    Waveform y(x.size());
    double theta = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        // IQ imbalance: gain split between branches, Q branch LO skewed by phi.
        const double i = x[n].real(), q = x[n].imag();
        cplx v{(1.0 + eps) * i, (1.0 - eps) * (q * cphi - i * sphi)};
        // Memoryless cubic PA.
        v = p.pa_a1 * v + p.pa_a3 * v * std::norm(v);
        // Carrier frequency offset.
        v *= std::polar(1.0, 2.0 * std::numbers::pi * p.cfo * static_cast<double>(n));
        // Wiener phase noise; theta[0] = 0.
        if (n > 0 && p.phase_noise_std > 0.0)
            theta += p.phase_noise_std * walk(rng);
        if (theta != 0.0)
            v *= std::polar(1.0, theta);
        v += p.dc_offset;
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error("impairment overflow");
        y[n] = v;
    }
    return y;
}

Waveform apply_channel(const Waveform& x, const ChannelConfig& ch, Rng& rng)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto cn = [&] { return cplx{gauss(rng), gauss(rng)} / std::numbers::sqrt2; };

    cplx h{1.0, 0.0};
    if (ch.model == ChannelModel::rayleigh_block) {
        h = cn();
    } else if (ch.model == ChannelModel::rician_block) {
        const double k = std::pow(10.0, ch.rician_k_db / 10.0);
        h = std::sqrt(k / (k + 1.0)) + std::sqrt(1.0 / (k + 1.0)) * cn();
    }

    Waveform y(x.size());
    double power = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        y[n] = h * x[n];
        power += std::norm(y[n]);
    }
    if (ch.noiseless() || x.empty())
        return y;
    power /= static_cast<double>(x.size());
    const double sigma = std::sqrt(power / std::pow(10.0, ch.snr_db / 10.0) / 2.0);
    for (auto& v : y)
        v += cplx{sigma * gauss(rng), sigma * gauss(rng)};
    return y;
}

std::vector<TransmitterProfile> synth_population(std::size_t n, std::uint64_t seed)
{
    if (n == 0)
        throw ConfigError("empty population");
    if (n > outlier_tx_id)
        throw ConfigError("population too large for 16-bit tx ids");
    Rng rng = substream(seed, stream::population);
    const auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

    std::vector<TransmitterProfile> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto& p = out[k];
        p.tx_id = static_cast<std::uint16_t>(k);
        p.iq_gain_imbalance = uni(-0.15, 0.15);
        p.iq_phase_imbalance = uni(-0.15, 0.15);
        p.cfo = uni(-0.003, 0.003);
        p.phase_noise_std = uni(0.0, 0.02);
        p.pa_a1 = uni(0.9, 1.1);
        p.pa_a3 = uni(-0.08, 0.0);
        const double r = 0.03 * std::sqrt(uni(0.0, 1.0));
        p.dc_offset = std::polar(r, uni(0.0, 2.0 * std::numbers::pi));
    }
    return out;
}

void CorpusConfig::validate() const
{
    if (packets_min > packets_max)
        throw ConfigError("packets_min must not exceed packets_max");
    if (packets_max == 0)
        throw ConfigError("packets_max must be >= 1");
    channel.validate();
}

SignalSample to_sample(const Waveform& w)
{
    SignalSample s;
    for (std::size_t n = 0; n < samples_per_packet && n < w.size(); ++n) {
        s.iq[2 * n] = static_cast<float>(w[n].real());
        s.iq[2 * n + 1] = static_cast<float>(w[n].imag());
    }
    return s;
}

Corpus generate_corpus(const std::vector<TransmitterProfile>& profiles, const CorpusConfig& cfg)
{
    cfg.validate();
    for (const auto& p : profiles)
        p.validate();

    const Waveform preamble = base_preamble();
    std::vector<std::vector<Waveform>> per_tx(profiles.size());
    const std::uint64_t corpus_seed = derive_seed(cfg.seed, stream::corpus);

    std::string failure;
    const long n_tx = static_cast<long>(profiles.size());
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < n_tx; ++k) {
        const auto& p = profiles[static_cast<std::size_t>(k)];
        Rng rng = substream(corpus_seed, p.tx_id);
        const std::size_t count =
            std::uniform_int_distribution<std::size_t>(cfg.packets_min, cfg.packets_max)(rng);
        auto& out = per_tx[static_cast<std::size_t>(k)];
        out.reserve(count);
        try {
            for (std::size_t i = 0; i < count; ++i)
                out.push_back(apply_channel(apply_impairments(preamble, p, rng), cfg.channel, rng));
        } catch (const Error& e) {
#pragma omp critical
            failure = e.what();
        }
    }
    if (!failure.empty())
        throw Error(failure);

    double peak = 0.0;
    for (const auto& tx : per_tx)
        for (const auto& w : tx)
            for (const auto& v : w)
                peak = std::max({peak, std::abs(v.real()), std::abs(v.imag())});
    const double scale = peak > 0.0 ? 1.0 / peak : 1.0;

    Corpus c;
    c.profiles = profiles;
    nlohmann::json counts = nlohmann::json::object();
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        counts[std::to_string(profiles[k].tx_id)] = per_tx[k].size();
        for (auto& w : per_tx[k]) {
            for (auto& v : w)
                v *= scale;
            c.samples.push_back({to_sample(w), profiles[k].tx_id});
        }
    }
    c.manifest = {{"generator", "simulate"},
                  {"seed", cfg.seed},
                  {"packets_min", cfg.packets_min},
                  {"packets_max", cfg.packets_max},
                  {"channel", cfg.channel},
                  {"normalization_scale", scale},
                  {"per_tx_counts", counts}};
    return c;
}

} // namespace rfaug::sim
