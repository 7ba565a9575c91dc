#include "rfaug/signal.hpp"

#include "rfaug/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace rfaug {

bool SignalSample::all_finite() const
{
    return std::all_of(iq.begin(), iq.end(), [](float v) { return std::isfinite(v); });
}

float SignalSample::max_abs() const
{
    float m = 0.0f;
    for (float v : iq)
        m = std::max(m, std::abs(v));
    return m;
}

TransmitterProfile TransmitterProfile::identity(std::uint16_t id)
{
    TransmitterProfile p;
    p.tx_id = id;
    return p;
}

void TransmitterProfile::validate() const
{
    const auto bad = [this](const char* what) {
        return ConfigError("transmitter " + std::to_string(tx_id) + ": " + what);
    };
    if (!(std::abs(iq_gain_imbalance) < 0.5))
        throw bad("|iq_gain_imbalance| must be < 0.5");
    if (!(std::abs(iq_phase_imbalance) < 0.5))
        throw bad("|iq_phase_imbalance| must be < 0.5");
    if (!(std::abs(cfo) < 0.01))
        throw bad("|cfo| must be < 0.01");
    if (!(phase_noise_std >= 0.0 && phase_noise_std < 0.1))
        throw bad("phase_noise_std must be in [0, 0.1)");
    if (!(pa_a1 > 0.0))
        throw bad("pa_a1 must be > 0");
    if (!std::isfinite(pa_a3) || !std::isfinite(dc_offset.real()) || !std::isfinite(dc_offset.imag()))
        throw bad("non-finite parameter");
}

void ChannelConfig::validate() const
{
    if (!(noiseless() || (snr_db >= -10.0 && snr_db <= 60.0)))
        throw ConfigError("snr_db must be in [-10, 60] (or >= 200 for a noiseless channel)");
    if (!std::isfinite(rician_k_db))
        throw ConfigError("rician_k_db must be finite");
}

const char* to_string(ChannelModel m)
{
    switch (m) {
    case ChannelModel::awgn:
        return "awgn";
    case ChannelModel::rayleigh_block:
        return "rayleigh_block";
    case ChannelModel::rician_block:
        return "rician_block";
    }
    return "?";
}

ChannelModel channel_model_from_string(const std::string& s)
{
    if (s == "awgn")
        return ChannelModel::awgn;
    if (s == "rayleigh_block" || s == "rayleigh")
        return ChannelModel::rayleigh_block;
    if (s == "rician_block" || s == "rician")
        return ChannelModel::rician_block;
    throw ConfigError("unknown channel model '" + s + "'");
}

std::vector<std::pair<std::uint16_t, std::size_t>> Corpus::counts() const
{
    std::map<std::uint16_t, std::size_t> m;
    for (const auto& s : samples)
        ++m[s.tx_id];
    return {m.begin(), m.end()};
}

std::vector<SignalSample> Corpus::samples_of(const std::vector<std::uint16_t>& ids) const
{
    const std::set<std::uint16_t> want(ids.begin(), ids.end());
    std::vector<SignalSample> out;
    for (const auto& s : samples)
        if (want.count(s.tx_id))
            out.push_back(s.sample);
    return out;
}

std::vector<std::uint16_t> Corpus::tx_ids() const
{
    std::vector<std::uint16_t> ids;
    for (const auto& [id, n] : counts())
        ids.push_back(id);
    return ids;
}

void to_json(nlohmann::json& j, const TransmitterProfile& p)
{
    j = {{"tx_id", p.tx_id},
         {"iq_gain_imbalance", p.iq_gain_imbalance},
         {"iq_phase_imbalance", p.iq_phase_imbalance},
         {"cfo", p.cfo},
         {"phase_noise_std", p.phase_noise_std},
         {"pa_a1", p.pa_a1},
         {"pa_a3", p.pa_a3},
         {"dc_offset", {p.dc_offset.real(), p.dc_offset.imag()}}};
}

void from_json(const nlohmann::json& j, TransmitterProfile& p)
{
    j.at("tx_id").get_to(p.tx_id);
    j.at("iq_gain_imbalance").get_to(p.iq_gain_imbalance);
    j.at("iq_phase_imbalance").get_to(p.iq_phase_imbalance);
    j.at("cfo").get_to(p.cfo);
    j.at("phase_noise_std").get_to(p.phase_noise_std);
    j.at("pa_a1").get_to(p.pa_a1);
    j.at("pa_a3").get_to(p.pa_a3);
    p.dc_offset = {j.at("dc_offset").at(0).get<double>(), j.at("dc_offset").at(1).get<double>()};
}

void to_json(nlohmann::json& j, const ChannelConfig& c)
{
    j = {{"model", to_string(c.model)}, {"snr_db", c.snr_db}, {"rician_k_db", c.rician_k_db}};
}

void from_json(const nlohmann::json& j, ChannelConfig& c)
{
    c.model = channel_model_from_string(j.at("model").get<std::string>());
    j.at("snr_db").get_to(c.snr_db);
    c.rician_k_db = j.value("rician_k_db", 10.0);
}

} // namespace rfaug
