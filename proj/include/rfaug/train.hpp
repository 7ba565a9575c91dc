// rfaug/train.hpp
//
// First-order optimizers and the generic supervised training loop.

#pragma once

#include "rfaug/loss.hpp"
#include "rfaug/network.hpp"
#include "rfaug/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace rfaug::nn {

enum class OptimizerKind { sgd_momentum, adam_like };

struct TrainConfig {
    float learning_rate = 1e-3f;
    std::size_t batch_size = 64;
    std::size_t epochs = 10;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::adam_like;

    // Throws ConfigError on a non-positive rate, batch size or epoch count.
    void validate() const;
};

// sgd_momentum: momentum 0.9. adam_like: bias-corrected moments,
// beta = (0.9, 0.999), eps = 1e-8.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, float learning_rate, std::size_t param_count);

    void step(std::span<float> params, std::span<const float> grads);
    float learning_rate() const { return lr_; }

private:
    OptimizerKind kind_;
    float lr_;
    std::vector<float> m_;
    std::vector<float> v_;
    std::uint64_t t_ = 0;
};

struct TrainResult {
    std::vector<float> params;
    std::vector<double> loss_curve; // mean training loss per epoch
};

// Fixed-seed permutation of 0..n-1 for one epoch.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

// Minibatch training of `net` on (data, targets). Starts from `initial`
// when given, otherwise from net.init_params(cfg.seed). Throws
// "training diverged at epoch k" if the epoch loss is not finite.
TrainResult train(const Network& net, const Tensor& data, const Tensor& targets, LossKind loss_kind,
                  const TrainConfig& cfg, std::vector<float> initial = {});

} // namespace rfaug::nn
