// rfaug/fingerprint_sim.hpp
//
// Synthetic transmitter population and capture corpus. Each transmitter's
// fingerprint is a fixed transmit chain applied to a shared preamble:
//
//   IQ imbalance -> PA nonlinearity -> CFO -> phase noise -> DC offset
//
// followed by a block-fading channel with AWGN.

#pragma once

#include "rfaug/rng.hpp"
#include "rfaug/signal.hpp"

#include <cstdint>

namespace rfaug::sim {

// Sixteen fixed pseudorandom QPSK symbols repeated sixteen times; unit peak.
Waveform base_preamble();

// Throws Error("impairment overflow") if the result is not finite.
Waveform apply_impairments(const Waveform& x, const TransmitterProfile& p, Rng& rng);

Waveform apply_channel(const Waveform& x, const ChannelConfig& ch, Rng& rng);

// Parameters drawn uniformly from:
//   epsilon, phi in [-0.15, 0.15]     cfo in [-0.003, 0.003]
//   phase_noise_std in [0, 0.02]      pa_a1 in [0.9, 1.1], pa_a3 in [-0.08, 0]
//   dc uniform on the disk of radius 0.03
// tx ids are 0..n-1. Throws ConfigError("empty population") for n == 0.
std::vector<TransmitterProfile> synth_population(std::size_t n, std::uint64_t seed);

struct CorpusConfig {
    std::size_t packets_min = 100;
    std::size_t packets_max = 300;
    ChannelConfig channel{};
    std::uint64_t seed = 0;

    void validate() const;
};

// Per-transmitter work runs in parallel on independent (seed, tx_id)
// substreams; the output equals sequential generation. The whole corpus is
// scaled so its largest absolute I/Q entry is 1.
Corpus generate_corpus(const std::vector<TransmitterProfile>& profiles, const CorpusConfig& cfg);

// Waveform -> SignalSample without normalization.
SignalSample to_sample(const Waveform& w);

} // namespace rfaug::sim
