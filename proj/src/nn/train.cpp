#include "rfaug/train.hpp"

#include "rfaug/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace rfaug::nn {

void TrainConfig::validate() const
{
    if (!(learning_rate > 0.0f) || !std::isfinite(learning_rate))
        throw ConfigError("learning_rate must be > 0");
    if (batch_size < 1)
        throw ConfigError("batch_size must be >= 1");
    if (epochs < 1)
        throw ConfigError("epochs must be >= 1");
}

Optimizer::Optimizer(OptimizerKind kind, float learning_rate, std::size_t param_count)
    : kind_(kind), lr_(learning_rate), m_(param_count, 0.0f),
      v_(kind == OptimizerKind::adam_like ? param_count : 0, 0.0f)
{
}

void Optimizer::step(std::span<float> params, std::span<const float> grads)
{
    ++t_;
    const std::size_t n = params.size();
    if (kind_ == OptimizerKind::sgd_momentum) {
        for (std::size_t i = 0; i < n; ++i) {
            const float m = 0.9f * m_[i] + grads[i];
            m_[i] = std::abs(m) < std::numeric_limits<float>::min() ? 0.0f : m;
            params[i] -= lr_ * m_[i];
        }
        return;
    }
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    const float step = static_cast<float>(lr_ * std::sqrt(c2) / c1);
    const float eps_hat = static_cast<float>(eps * std::sqrt(c2));
    // Moments of parameters that stop receiving gradient decay into the
    // subnormal range, where every arithmetic op is two orders of magnitude
    // slower; they are flushed to zero instead.
    constexpr float tiny = std::numeric_limits<float>::min();
    for (std::size_t i = 0; i < n; ++i) {
        const float g = grads[i];
        float m = static_cast<float>(b1) * m_[i] + static_cast<float>(1.0 - b1) * g;
        float v = static_cast<float>(b2) * v_[i] + static_cast<float>(1.0 - b2) * g * g;
        m = std::abs(m) < tiny ? 0.0f : m;
        v = v < tiny ? 0.0f : v;
        m_[i] = m;
        v_[i] = v;
        params[i] -= step * m / (std::sqrt(v) + eps_hat);
    }
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch)
{
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng = substream(derive_seed(seed, stream::shuffle), epoch);
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
}

TrainResult train(const Network& net, const Tensor& data, const Tensor& targets, LossKind loss_kind,
                  const TrainConfig& cfg, std::vector<float> initial)
{
    cfg.validate();
    if (data.batch() == 0)
        throw ConfigError("training data is empty");
    if (targets.batch() != data.batch())
        throw ConfigError("training data and targets differ in sample count");

    TrainResult result;
    result.params = initial.empty() ? net.init_params(cfg.seed) : std::move(initial);
    Optimizer opt(cfg.optimizer, cfg.learning_rate, net.param_count());
    std::vector<float> grads(net.param_count());
    Activations acts;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto order = epoch_order(data.batch(), cfg.seed, epoch);
        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::span<const std::size_t> ids(order.data() + start, end - start);
            const Tensor x = data.rows(ids);
            const Tensor y = targets.rows(ids);
            net.forward(result.params, x, acts);
            LossGrad lg;
            try {
                lg = loss_grad(loss_kind, acts.output(), y);
            } catch (const Error&) {
                throw Error("training diverged at epoch " + std::to_string(epoch));
            }
            net.backward(result.params, acts, lg.grad_prediction, grads, nullptr);
            opt.step(result.params, grads);
            total += lg.value * static_cast<double>(ids.size());
        }
        const double mean = total / static_cast<double>(data.batch());
        if (!std::isfinite(mean))
            throw Error("training diverged at epoch " + std::to_string(epoch));
        result.loss_curve.push_back(mean);
    }
    return result;
}

} // namespace rfaug::nn
