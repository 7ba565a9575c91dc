// Internal layer implementations behind rfaug::nn::Network.

#pragma once

#include "rfaug/network.hpp"
#include "rfaug/rng.hpp"

#include <memory>
#include <span>
#include <vector>

namespace rfaug::nn {

class Layer {
public:
    explicit Layer(Dims in) : in_(in) {}
    virtual ~Layer() = default;

    const Dims& input_dims() const { return in_; }
    virtual Dims output_dims() const = 0;
    virtual std::size_t param_count() const { return 0; }
    virtual void init(std::span<float> /*params*/, Rng& /*rng*/) const {}

    virtual void forward(std::span<const float> params, const Tensor& in, Tensor& out,
                         std::vector<Tensor>& cache) const = 0;
    // grad_in may be null when the caller does not need it. grad_params is
    // accumulated into, or empty to skip the weight gradients.
    virtual void backward(std::span<const float> params, const Tensor& in, const Tensor& out,
                          const std::vector<Tensor>& cache, const Tensor& grad_out, Tensor* grad_in,
                          std::span<float> grad_params) const = 0;

protected:
    Dims in_;
};

// Throws "shape error at layer <index>" when spec cannot follow `in`.
std::shared_ptr<const Layer> make_layer(const LayerSpec& spec, Dims in, std::size_t index);

} // namespace rfaug::nn
