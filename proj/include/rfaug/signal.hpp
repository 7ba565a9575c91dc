// rfaug/signal.hpp
//
// Domain types for simulated transmitter captures.

#pragma once

#include <json.hpp>

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace rfaug {

using cplx = std::complex<double>;
using Waveform = std::vector<cplx>;

inline constexpr std::size_t samples_per_packet = 256;
inline constexpr std::uint16_t outlier_tx_id = 65535;

// One packet's first 256 IQ samples as a 256x2 row-major matrix
// (column 0 = I, column 1 = Q).
struct SignalSample {
    std::array<float, 2 * samples_per_packet> iq{};

    float i(std::size_t n) const { return iq[2 * n]; }
    float q(std::size_t n) const { return iq[2 * n + 1]; }
    bool all_finite() const;
    float max_abs() const;
    bool operator==(const SignalSample&) const = default;
};

struct LabeledSample {
    SignalSample sample;
    std::uint16_t tx_id = 0;
    bool operator==(const LabeledSample&) const = default;
};

// Impairment parameters of one simulated transmitter.
struct TransmitterProfile {
    std::uint16_t tx_id = 0;
    double iq_gain_imbalance = 0.0;  // epsilon
    double iq_phase_imbalance = 0.0; // phi, radians
    double cfo = 0.0;                // cycles per sample
    double phase_noise_std = 0.0;    // radians per sample step
    double pa_a1 = 1.0;
    double pa_a3 = 0.0;
    cplx dc_offset{0.0, 0.0};

    static TransmitterProfile identity(std::uint16_t id = 0);
    // Throws ConfigError naming the first violated bound.
    void validate() const;
    bool operator==(const TransmitterProfile&) const = default;
};

enum class ChannelModel { awgn, rayleigh_block, rician_block };

// snr_db >= 200 stands for a noiseless channel.
struct ChannelConfig {
    ChannelModel model = ChannelModel::awgn;
    double snr_db = 25.0;
    double rician_k_db = 10.0;

    bool noiseless() const { return snr_db >= 200.0; }
    void validate() const;
    bool operator==(const ChannelConfig&) const = default;
};

const char* to_string(ChannelModel m);
ChannelModel channel_model_from_string(const std::string& s);

struct Corpus {
    std::vector<LabeledSample> samples;
    std::vector<TransmitterProfile> profiles;
    nlohmann::json manifest = nlohmann::json::object();

    std::size_t size() const { return samples.size(); }
    // Sample count per tx id, ordered by id.
    std::vector<std::pair<std::uint16_t, std::size_t>> counts() const;
    // Samples (in corpus order) whose tx id is in `ids`.
    std::vector<SignalSample> samples_of(const std::vector<std::uint16_t>& ids) const;
    std::vector<std::uint16_t> tx_ids() const;
    bool operator==(const Corpus&) const = default;
};

void to_json(nlohmann::json& j, const TransmitterProfile& p);
void from_json(const nlohmann::json& j, TransmitterProfile& p);
void to_json(nlohmann::json& j, const ChannelConfig& c);
void from_json(const nlohmann::json& j, ChannelConfig& c);

} // namespace rfaug
