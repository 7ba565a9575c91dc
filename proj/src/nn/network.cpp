#include "rfaug/network.hpp"

#include "layers.hpp"
#include "rfaug/error.hpp"

#include <algorithm>
#include <sstream>

namespace rfaug::nn {

std::string LayerSpec::str() const
{
    std::ostringstream os;
    switch (kind) {
    case LayerKind::dense:
        os << "Dense(" << units << ")";
        break;
    case LayerKind::conv2d:
        os << "Conv2D(" << units << ",(" << kh << "," << kw << "),(" << sh << ",1))";
        break;
    case LayerKind::conv_transpose2d:
        os << "ConvT2D(" << units << ",(" << kh << "," << kw << "),(" << sh << ",1))";
        break;
    case LayerKind::relu:
        os << "ReLU";
        break;
    case LayerKind::sigmoid:
        os << "Sigmoid";
        break;
    case LayerKind::softmax:
        os << "Softmax";
        break;
    case LayerKind::flatten:
        os << "Flatten";
        break;
    case LayerKind::reshape:
        os << "Reshape(" << shape.str() << ")";
        break;
    case LayerKind::residual_block:
        os << "ResidualBlock(" << units << ")";
        break;
    case LayerKind::batch_norm_free:
        os << "BatchNormFree";
        break;
    }
    return os.str();
}

Network::Network(Dims input, std::vector<LayerSpec> specs) : input_(input), specs_(std::move(specs))
{
    Dims cur = input_;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
        auto layer = make_layer(specs_[i], cur, i);
        offsets_.push_back(param_count_);
        param_count_ += layer->param_count();
        cur = layer->output_dims();
        layers_.push_back(std::move(layer));
    }
    offsets_.push_back(param_count_);
    output_ = cur;
}

std::string Network::describe() const
{
    std::ostringstream os;
    os << "Input(" << input_.str() << ")";
    for (const auto& s : specs_)
        os << " -> " << s.str();
    return os.str();
}

std::uint64_t Network::spec_hash() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : describe()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<float> Network::init_params(std::uint64_t seed) const
{
    std::vector<float> params(param_count_, 0.0f);
    Rng rng = substream(seed, stream::init);
    std::span<float> all(params);
    for (std::size_t i = 0; i < layers_.size(); ++i)
        layers_[i]->init(all.subspan(offsets_[i], offsets_[i + 1] - offsets_[i]), rng);
    return params;
}

Tensor Network::forward(std::span<const float> params, const Tensor& input) const
{
    // Reused across calls: fresh multi-megabyte buffers cost a page fault per
    // page on every pass.
    thread_local Activations acts;
    forward(params, input, acts);
    return acts.output();
}

void Network::forward(std::span<const float> params, const Tensor& input, Activations& acts) const
{
    if (input.dims() != input_)
        throw Error("shape error at layer 0: expected input " + input_.str() + ", got " + input.dims().str());
    if (params.size() != param_count_)
        throw Error("shape error: " + std::to_string(params.size()) + " parameters for a network of " +
                    std::to_string(param_count_));
    acts.input = input;
    acts.outputs.resize(layers_.size());
    acts.caches.resize(layers_.size());
    const Tensor* cur = &acts.input;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        layers_[i]->forward(params.subspan(offsets_[i], offsets_[i + 1] - offsets_[i]), *cur, acts.outputs[i],
                            acts.caches[i]);
        cur = &acts.outputs[i];
    }
}

void Network::backward(std::span<const float> params, const Activations& acts, const Tensor& grad_output,
                       std::span<float> grad_params, Tensor* grad_input) const
{
    if (grad_params.size() != param_count_ && !grad_params.empty())
        throw Error("shape error: gradient buffer of " + std::to_string(grad_params.size()) + " for " +
                    std::to_string(param_count_) + " parameters");
    if (grad_output.dims() != output_ || grad_output.batch() != acts.output().batch())
        throw Error("shape error at layer " + std::to_string(layers_.size()) + ": output gradient " +
                    grad_output.dims().str() + " does not match " + output_.str());
    std::fill(grad_params.begin(), grad_params.end(), 0.0f);
    const bool weights = !grad_params.empty();
    if (layers_.empty()) {
        if (grad_input)
            *grad_input = grad_output;
        return;
    }
    thread_local Tensor grad, next;
    grad = grad_output;
    for (std::size_t k = layers_.size(); k-- > 0;) {
        const Tensor& in = k == 0 ? acts.input : acts.outputs[k - 1];
        const bool need_input = k > 0 || grad_input != nullptr;
        layers_[k]->backward(params.subspan(offsets_[k], offsets_[k + 1] - offsets_[k]), in, acts.outputs[k],
                             acts.caches[k], grad, need_input ? &next : nullptr,
                             weights ? grad_params.subspan(offsets_[k], offsets_[k + 1] - offsets_[k])
                                     : std::span<float>{});
        if (need_input)
            std::swap(grad, next);
    }
    if (grad_input)
        *grad_input = grad;
}

} // namespace rfaug::nn
