// rfaug/network.hpp
//
// Sequential networks over NHWC tensors. A Network is an immutable layer
// graph; parameters live in a separate flat vector so one network can be
// evaluated with many parameter sets and from many threads at once.

#pragma once

#include "rfaug/tensor.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rfaug::nn {

enum class LayerKind {
    dense,
    conv2d,
    conv_transpose2d,
    relu,
    sigmoid,
    softmax,
    flatten,
    reshape,
    residual_block,
    batch_norm_free,
};

struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    std::size_t units = 0; // dense outputs, conv filters
    std::size_t kh = 1, kw = 1, sh = 1;
    Dims shape{}; // reshape target

    static LayerSpec dense(std::size_t out) { return {LayerKind::dense, out}; }
    static LayerSpec conv(std::size_t filters, std::size_t kh, std::size_t kw, std::size_t sh = 1)
    {
        return {LayerKind::conv2d, filters, kh, kw, sh};
    }
    static LayerSpec conv_t(std::size_t filters, std::size_t kh, std::size_t kw, std::size_t sh = 1)
    {
        return {LayerKind::conv_transpose2d, filters, kh, kw, sh};
    }
    static LayerSpec relu() { return {LayerKind::relu}; }
    static LayerSpec sigmoid() { return {LayerKind::sigmoid}; }
    static LayerSpec softmax() { return {LayerKind::softmax}; }
    static LayerSpec flatten() { return {LayerKind::flatten}; }
    static LayerSpec reshape(Dims d) { return {LayerKind::reshape, 0, 1, 1, 1, d}; }
    static LayerSpec residual(std::size_t filters) { return {LayerKind::residual_block, filters}; }
    // Records that the network deliberately carries no normalization layers.
    static LayerSpec batch_norm_free() { return {LayerKind::batch_norm_free}; }

    std::string str() const;
};

class Layer;

// Per-call scratch: the output of every layer plus whatever a layer keeps
// for its backward pass.
struct Activations {
    Tensor input;
    std::vector<Tensor> outputs;
    std::vector<std::vector<Tensor>> caches;

    const Tensor& output() const { return outputs.empty() ? input : outputs.back(); }
};

class Network {
public:
    Network() = default;
    Network(Dims input, std::vector<LayerSpec> specs);

    const Dims& input_dims() const { return input_; }
    const Dims& output_dims() const { return output_; }
    const std::vector<LayerSpec>& specs() const { return specs_; }
    std::size_t param_count() const { return param_count_; }
    std::size_t layer_count() const { return layers_.size(); }

    // FNV-1a over the canonical layer description; guards parameter files.
    std::uint64_t spec_hash() const;
    std::string describe() const;

    // Uniform fan-in scaled weights, zero biases.
    std::vector<float> init_params(std::uint64_t seed) const;

    Tensor forward(std::span<const float> params, const Tensor& input) const;
    void forward(std::span<const float> params, const Tensor& input, Activations& acts) const;

    // grad_params is overwritten (size param_count()); grad_input, if given,
    // receives d loss / d input. An empty grad_params skips the weight
    // gradients, for callers that only need the input gradient.
    void backward(std::span<const float> params, const Activations& acts, const Tensor& grad_output,
                  std::span<float> grad_params, Tensor* grad_input) const;

private:
    Dims input_{};
    Dims output_{};
    std::vector<LayerSpec> specs_;
    std::vector<std::shared_ptr<const Layer>> layers_;
    std::vector<std::size_t> offsets_;
    std::size_t param_count_ = 0;
};

} // namespace rfaug::nn
