#include "rfaug/architectures.hpp"

#include "rfaug/error.hpp"

#include <algorithm>

namespace rfaug::arch {

using nn::LayerSpec;

std::vector<LayerSpec> feature_extractor()
{
    return {
        LayerSpec::batch_norm_free(),
        LayerSpec::conv(32, 3, 2, 1),
        LayerSpec::relu(),
        LayerSpec::residual(32),
        LayerSpec::conv(32, 3, 1, 2),
        LayerSpec::relu(),
        LayerSpec::residual(32),
        LayerSpec::flatten(),
        LayerSpec::dense(feature_width),
        LayerSpec::relu(),
    };
}

nn::Network classifier(std::size_t outputs)
{
    auto specs = feature_extractor();
    specs.push_back(LayerSpec::dense(outputs));
    return nn::Network(signal_dims, std::move(specs));
}

nn::Network encoder_trunk()
{
    return nn::Network(signal_dims, {
                                        LayerSpec::batch_norm_free(),
                                        LayerSpec::conv(16, 5, 2, 2),
                                        LayerSpec::relu(),
                                        LayerSpec::conv(32, 5, 1, 2),
                                        LayerSpec::relu(),
                                        LayerSpec::flatten(),
                                    });
}

nn::Network encoder_head(std::size_t conditions, std::size_t outputs)
{
    return nn::Network({1, 1, encoder_trunk_width + conditions}, {LayerSpec::dense(outputs)});
}

nn::Network decoder(std::size_t latent_dim, std::size_t conditions)
{
    return nn::Network({1, 1, latent_dim + conditions}, {
                                                            LayerSpec::batch_norm_free(),
                                                            LayerSpec::dense(encoder_trunk_width),
                                                            LayerSpec::reshape({64, 1, 32}),
                                                            LayerSpec::conv_t(32, 5, 1, 2),
                                                            LayerSpec::relu(),
                                                            LayerSpec::conv_t(16, 5, 2, 2),
                                                            LayerSpec::relu(),
                                                            LayerSpec::conv_t(1, 1, 1, 1),
                                                        });
}

nn::Tensor to_tensor(const std::vector<SignalSample>& samples)
{
    nn::Tensor t(samples.size(), signal_dims);
    for (std::size_t i = 0; i < samples.size(); ++i)
        std::copy(samples[i].iq.begin(), samples[i].iq.end(), t.sample(i).begin());
    return t;
}

nn::Tensor to_tensor(const SignalSample& sample)
{
    return to_tensor(std::vector<SignalSample>{sample});
}

SignalSample from_tensor(const nn::Tensor& t, std::size_t index)
{
    if (t.dims() != signal_dims)
        throw Error("shape error: expected a " + signal_dims.str() + " signal tensor, got " + t.dims().str());
    SignalSample s;
    auto src = t.sample(index);
    std::copy(src.begin(), src.end(), s.iq.begin());
    return s;
}

std::vector<SignalSample> from_tensor(const nn::Tensor& t)
{
    std::vector<SignalSample> out;
    out.reserve(t.batch());
    for (std::size_t i = 0; i < t.batch(); ++i)
        out.push_back(from_tensor(t, i));
    return out;
}

} // namespace rfaug::arch
