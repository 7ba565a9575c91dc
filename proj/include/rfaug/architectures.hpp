// rfaug/architectures.hpp
//
// Concrete network layouts. Signals enter as 256x2x1 images and every
// convolution strides along time only.
//
// Feature extractor (shared by the OvA classifier and the judge):
//   Conv2D(32,(3,2),(1,1)) -> ReLU -> ResidualBlock(32)
//   -> Conv2D(32,(3,1),(2,1)) -> ReLU -> ResidualBlock(32)
//   -> Flatten -> Dense(128) -> ReLU
//
// Encoder trunk:  Conv2D(16,(5,2),(2,1)) -> ReLU -> Conv2D(32,(5,1),(2,1)) -> ReLU -> Flatten
// Encoder head:   Dense(2L) for a VAE (mu, logvar), Dense(L) for a plain autoencoder
// Decoder:        Dense(2048) -> Reshape(64,1,32) -> ConvT2D(32,(5,1),(2,1)) -> ReLU
//                 -> ConvT2D(16,(5,2),(2,1)) -> ReLU -> ConvT2D(1,(1,1),(1,1))
//
// None of them uses batch or layer normalization.

#pragma once

#include "rfaug/network.hpp"
#include "rfaug/signal.hpp"

#include <vector>

namespace rfaug::arch {

inline constexpr nn::Dims signal_dims{samples_per_packet, 2, 1};
inline constexpr std::size_t feature_width = 128;
inline constexpr std::size_t encoder_trunk_width = 64 * 32;

std::vector<nn::LayerSpec> feature_extractor();

// Feature extractor followed by a Dense(outputs) logit layer. The OvA
// classifier applies a sigmoid per head, the judge a softmax.
nn::Network classifier(std::size_t outputs);

nn::Network encoder_trunk();
nn::Network encoder_head(std::size_t conditions, std::size_t outputs);
nn::Network decoder(std::size_t latent_dim, std::size_t conditions);

nn::Tensor to_tensor(const std::vector<SignalSample>& samples);
nn::Tensor to_tensor(const SignalSample& sample);
SignalSample from_tensor(const nn::Tensor& t, std::size_t index);
std::vector<SignalSample> from_tensor(const nn::Tensor& t);

} // namespace rfaug::arch
