// rfaug/loss.hpp
//
// Scalar losses with gradients.
//
//   mse            mean over every element of (p - t)^2
//   bce            mean over every element of binary cross-entropy, p clamped to [1e-7, 1 - 1e-7]
//   cross_entropy  mean over the batch of -sum_k t_k log max(p_k, 1e-7); p is a probability row
//   gaussian_kl    KL(N(mu, exp(logvar)) || N(0, I)) summed over latent dims, mean over the batch;
//                  prediction carries mu and target carries logvar

#pragma once

#include "rfaug/tensor.hpp"

namespace rfaug::nn {

enum class LossKind { mse, bce, cross_entropy, gaussian_kl };

inline constexpr float probability_clamp = 1e-7f;

struct LossGrad {
    double value = 0.0;
    Tensor grad_prediction;
    Tensor grad_target; // only filled for gaussian_kl (d/d logvar)
};

double loss(LossKind kind, const Tensor& prediction, const Tensor& target);
LossGrad loss_grad(LossKind kind, const Tensor& prediction, const Tensor& target);

} // namespace rfaug::nn

namespace rfaug::nn {

// Fused, unclamped forms used when a network emits logits: softmax followed
// by cross_entropy, and per-element sigmoid followed by bce. Same reductions
// as the corresponding LossKind; gradients are with respect to the logits.
LossGrad softmax_cross_entropy(const Tensor& logits, const Tensor& target);
LossGrad sigmoid_bce(const Tensor& logits, const Tensor& target);

// Row-wise softmax / element-wise sigmoid of a logit tensor.
Tensor softmax(const Tensor& logits);
Tensor sigmoid(const Tensor& logits);

} // namespace rfaug::nn
