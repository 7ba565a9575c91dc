// Small random decoder/judge pairs for checking the latent objective
// gradient against central differences.

#pragma once

#include "rfaug/generative.hpp"
#include "rfaug/latent_opt.hpp"

#include <random>

namespace rfaug::testing {

struct ObjectiveInstance {
    gen::AEModel ae;
    latent::Judge judge;
    std::vector<float> anchor;
    std::vector<float> z;
};

namespace detail {

// Sign pattern of every pre-ReLU value on the decoder -> judge path at z.
inline std::vector<bool> relu_pattern(const ObjectiveInstance& inst, std::span<const float> z)
{
    nn::Tensor zt(1, {1, 1, z.size()});
    std::copy(z.begin(), z.end(), zt.values().begin());
    nn::Activations dec, jud;
    inst.ae.decoder.forward(inst.ae.decoder_params, zt, dec);
    inst.judge.net.forward(inst.judge.params, dec.output(), jud);
    std::vector<bool> out;
    for (const auto* acts : {&dec, &jud})
        for (float v : acts->outputs.front().values())
            out.push_back(v > 0.0f);
    return out;
}

} // namespace detail

// True when no ReLU changes state anywhere on the +-h stencil around z, so
// central differences see a smooth function.
inline bool smooth_on_stencil(const ObjectiveInstance& inst, double h)
{
    const auto base = detail::relu_pattern(inst, inst.z);
    auto probe = inst.z;
    for (std::size_t k = 0; k < probe.size(); ++k)
        for (double step : {-h, h}) {
            probe[k] = static_cast<float>(inst.z[k] + step);
            const bool same = detail::relu_pattern(inst, probe) == base;
            probe[k] = inst.z[k];
            if (!same)
                return false;
        }
    return true;
}

// Dense+ReLU decoder feeding a conv+ReLU judge with 2..4 authorized classes.
// Points whose stencil straddles a ReLU kink are redrawn.
inline ObjectiveInstance small_objective_instance(std::uint64_t seed, double h)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> nd;
    ObjectiveInstance inst;
    inst.ae.kind = gen::ModelKind::ae;
    inst.ae.latent_dim = 4;
    inst.ae.decoder = nn::Network({1, 1, 4}, {nn::LayerSpec::dense(32), nn::LayerSpec::relu(),
                                              nn::LayerSpec::reshape({16, 2, 1})});
    inst.ae.decoder_params = inst.ae.decoder.init_params(seed + 1);
    inst.judge.num_authorized = 2 + seed % 3;
    inst.judge.net = nn::Network({16, 2, 1}, {nn::LayerSpec::conv(4, 3, 2), nn::LayerSpec::relu(),
                                              nn::LayerSpec::flatten(),
                                              nn::LayerSpec::dense(inst.judge.num_authorized + 1)});
    inst.judge.params = inst.judge.net.init_params(seed + 2);
    inst.anchor.resize(4);
    inst.z.resize(4);
    do {
        for (std::size_t k = 0; k < 4; ++k) {
            inst.anchor[k] = nd(rng);
            inst.z[k] = inst.anchor[k] + 0.5f * nd(rng);
        }
    } while (!smooth_on_stencil(inst, h));
    return inst;
}

} // namespace rfaug::testing
