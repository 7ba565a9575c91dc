#include "layers.hpp"

#include "rfaug/error.hpp"
#include "rfaug/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rfaug::nn {

namespace {

// Elementwise passes over raw restrict pointers; through Tensor::operator[]
// the ReLU masks compile to data-dependent branches.
void relu_into(const float* __restrict x, float* __restrict y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void mask_into(const float* __restrict gate, const float* __restrict g, float* __restrict y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] = gate[i] > 0.0f ? g[i] : 0.0f;
}

void mask_inplace(const float* __restrict gate, float* __restrict y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] = gate[i] > 0.0f ? y[i] : 0.0f;
}

void add_into(const float* __restrict x, float* __restrict y, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] += x[i];
}

using kernels::ConvGeometry;

void init_uniform(std::span<float> w, std::size_t fan_in, Rng& rng)
{
    const float limit = std::sqrt(3.0f / static_cast<float>(std::max<std::size_t>(fan_in, 1)));
    std::uniform_real_distribution<float> dist(-limit, limit);
    for (auto& v : w)
        v = dist(rng);
}

class Dense final : public Layer {
public:
    Dense(Dims in, std::size_t out) : Layer(in), out_(out) {}

    Dims output_dims() const override { return {1, 1, out_}; }
    std::size_t param_count() const override { return in_.count() * out_ + out_; }
    void init(std::span<float> p, Rng& rng) const override
    {
        init_uniform(p.first(in_.count() * out_), in_.count(), rng);
        std::fill(p.begin() + static_cast<std::ptrdiff_t>(in_.count() * out_), p.end(), 0.0f);
    }

    void forward(std::span<const float> p, const Tensor& in, Tensor& out, std::vector<Tensor>&) const override
    {
        out.resize(in.batch(), output_dims());
        kernels::dense_forward(in.batch(), in_.count(), out_, in.data(), p.data(), p.data() + in_.count() * out_,
                               out.data());
    }

    void backward(std::span<const float> p, const Tensor& in, const Tensor&, const std::vector<Tensor>&,
                  const Tensor& grad_out, Tensor* grad_in, std::span<float> gp) const override
    {
        if (grad_in)
            grad_in->resize(in.batch(), in_);
        kernels::dense_backward(in.batch(), in_.count(), out_, in.data(), p.data(), grad_out.data(),
                                grad_in ? grad_in->data() : nullptr, gp.empty() ? nullptr : gp.data(),
                                gp.empty() ? nullptr : gp.data() + in_.count() * out_);
    }

private:
    std::size_t out_;
};

class Conv final : public Layer {
public:
    Conv(Dims in, const LayerSpec& s)
        : Layer(in), g_(ConvGeometry::forward(in.h, in.w, in.c, s.units, s.kh, s.kw, s.sh))
    {
    }

    Dims output_dims() const override { return {g_.out_h, g_.out_w, g_.out_c}; }
    std::size_t param_count() const override { return g_.weight_count() + g_.out_c; }
    void init(std::span<float> p, Rng& rng) const override
    {
        init_uniform(p.first(g_.weight_count()), g_.patch(), rng);
        std::fill(p.begin() + static_cast<std::ptrdiff_t>(g_.weight_count()), p.end(), 0.0f);
    }

    void forward(std::span<const float> p, const Tensor& in, Tensor& out, std::vector<Tensor>&) const override
    {
        out.resize(in.batch(), output_dims());
        kernels::conv_forward(g_, in.batch(), in.data(), p.data(), p.data() + g_.weight_count(), out.data());
    }

    void backward(std::span<const float> p, const Tensor& in, const Tensor&, const std::vector<Tensor>&,
                  const Tensor& grad_out, Tensor* grad_in, std::span<float> gp) const override
    {
        if (!gp.empty())
            kernels::conv_backward_weights(g_, in.batch(), in.data(), grad_out.data(), gp.data(),
                                           gp.data() + g_.weight_count());
        if (grad_in) {
            grad_in->resize(in.batch(), in_);
            kernels::conv_backward_input(g_, in.batch(), grad_out.data(), p.data(), grad_in->data());
        }
    }

private:
    ConvGeometry g_;
};

// Transposed convolution: the exact adjoint of the convolution that maps an
// (h * sh, w + kw - 1, filters) grid onto this layer's (h, w, c) input.
class ConvTranspose final : public Layer {
public:
    ConvTranspose(Dims in, const LayerSpec& s)
        : Layer(in), g_(ConvGeometry::forward(in.h * s.sh, in.w + s.kw - 1, s.units, in.c, s.kh, s.kw, s.sh))
    {
        if (g_.out_h != in.h || g_.out_w != in.w)
            throw Error("transposed kernel " + std::to_string(s.kh) + " with stride " + std::to_string(s.sh) +
                        " does not invert to " + in.str());
    }

    Dims output_dims() const override { return {g_.in_h, g_.in_w, g_.in_c}; }
    std::size_t param_count() const override { return g_.weight_count() + g_.in_c; }
    void init(std::span<float> p, Rng& rng) const override
    {
        init_uniform(p.first(g_.weight_count()), g_.out_c * g_.kh * g_.kw, rng);
        std::fill(p.begin() + static_cast<std::ptrdiff_t>(g_.weight_count()), p.end(), 0.0f);
    }

    void forward(std::span<const float> p, const Tensor& in, Tensor& out, std::vector<Tensor>&) const override
    {
        out.resize(in.batch(), output_dims());
        kernels::conv_backward_input(g_, in.batch(), in.data(), p.data(), out.data());
        const float* bias = p.data() + g_.weight_count();
        const std::size_t positions = in.batch() * g_.in_h * g_.in_w;
        float* y = out.data();
        for (std::size_t i = 0; i < positions; ++i)
            for (std::size_t c = 0; c < g_.in_c; ++c)
                y[i * g_.in_c + c] += bias[c];
    }

    void backward(std::span<const float> p, const Tensor& in, const Tensor&, const std::vector<Tensor>&,
                  const Tensor& grad_out, Tensor* grad_in, std::span<float> gp) const override
    {
        if (!gp.empty()) {
            kernels::conv_backward_weights(g_, in.batch(), grad_out.data(), in.data(), gp.data(), nullptr);
            float* gb = gp.data() + g_.weight_count();
            const std::size_t positions = in.batch() * g_.in_h * g_.in_w;
            const float* dy = grad_out.data();
            for (std::size_t i = 0; i < positions; ++i)
                for (std::size_t c = 0; c < g_.in_c; ++c)
                    gb[c] += dy[i * g_.in_c + c];
        }
        if (grad_in) {
            grad_in->resize(in.batch(), in_);
            kernels::conv_forward(g_, in.batch(), grad_out.data(), p.data(), nullptr, grad_in->data());
        }
    }

private:
    ConvGeometry g_;
};

class Relu final : public Layer {
public:
    using Layer::Layer;
    Dims output_dims() const override { return in_; }

    void forward(std::span<const float>, const Tensor& in, Tensor& out, std::vector<Tensor>&) const override
    {
        out.resize(in.batch(), in_);
        relu_into(in.data(), out.data(), in.size());
    }

    void backward(std::span<const float>, const Tensor& in, const Tensor&, const std::vector<Tensor>&,
                  const Tensor& grad_out, Tensor* grad_in, std::span<float>) const override
    {
        if (!grad_in)
            return;
        grad_in->resize(in.batch(), in_);
        mask_into(in.data(), grad_out.data(), grad_in->data(), in.size());
    }
};

class Sigmoid final : public Layer {
public:
    using Layer::Layer;
    Dims output_dims() const override { return in_; }

    void forward(std::span<const float>, const Tensor& in, Tensor& out, std::vector<Tensor>&) const override
    {
        out.resize(in.batch(), in_);
        std::transform(in.data(), in.data() + in.size(), out.data(),
                       [](float v) { return 1.0f / (1.0f + std::exp(-v)); });
    }

    void backward(std::span<const float>, const Tensor& in, const Tensor& out, const std::vector<Tensor>&,
                  const Tensor& grad_out, Tensor* grad_in, std::span<float>) const override
    {
        if (!grad_in)
            return;
        grad_in->resize(in.batch(), in_);
        for (std::size_t i = 0; i < in.size(); ++i)
            (*grad_in)[i] = grad_out[i] * out[i] * (1.0f - out[i]);
    }
};

// Normalizes over every value of a sample.
class Softmax final : public Layer {
public:
    using Layer::Layer;
    Dims output_dims() const override { return in_; }

    void forward(std::span<const float>, const Tensor& in, Tensor& out, std::vector<Tensor>&) const override
    {
        out.resize(in.batch(), in_);
        const std::size_t n = in_.count();
        for (std::size_t b = 0; b < in.batch(); ++b) {
            auto x = in.sample(b);
            auto y = out.sample(b);
            const float m = *std::max_element(x.begin(), x.end());
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                y[i] = std::exp(x[i] - m);
                sum += y[i];
            }
            for (std::size_t i = 0; i < n; ++i)
                y[i] = static_cast<float>(y[i] / sum);
        }
    }

    void backward(std::span<const float>, const Tensor& in, const Tensor& out, const std::vector<Tensor>&,
                  const Tensor& grad_out, Tensor* grad_in, std::span<float>) const override
    {
        if (!grad_in)
            return;
        grad_in->resize(in.batch(), in_);
        const std::size_t n = in_.count();
        for (std::size_t b = 0; b < in.batch(); ++b) {
            auto y = out.sample(b);
            auto dy = grad_out.sample(b);
            auto dx = grad_in->sample(b);
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                dot += static_cast<double>(dy[i]) * y[i];
            for (std::size_t i = 0; i < n; ++i)
                dx[i] = static_cast<float>(y[i] * (dy[i] - dot));
        }
    }
};

// Flatten, Reshape and the normalization-free marker only relabel dims.
class Relabel final : public Layer {
public:
    Relabel(Dims in, Dims out) : Layer(in), out_(out) {}
    Dims output_dims() const override { return out_; }

    void forward(std::span<const float>, const Tensor& in, Tensor& out, std::vector<Tensor>&) const override
    {
        out = in;
        out.reshape(out_);
    }

    void backward(std::span<const float>, const Tensor& in, const Tensor&, const std::vector<Tensor>&,
                  const Tensor& grad_out, Tensor* grad_in, std::span<float>) const override
    {
        if (!grad_in)
            return;
        *grad_in = grad_out;
        grad_in->reshape(in.dims());
    }

private:
    Dims out_;
};

// conv(3x1) -> relu -> conv(3x1) -> + skip -> relu, channel count preserved.
class Residual final : public Layer {
public:
    Residual(Dims in, std::size_t filters)
        : Layer(in), g_(ConvGeometry::forward(in.h, in.w, in.c, filters, 3, 1, 1))
    {
        if (in.c != filters)
            throw Error("residual block with " + std::to_string(filters) + " filters needs " +
                        std::to_string(filters) + " input channels, got " + in.str());
    }

    Dims output_dims() const override { return in_; }
    std::size_t conv_params() const { return g_.weight_count() + g_.out_c; }
    std::size_t param_count() const override { return 2 * conv_params(); }
    void init(std::span<float> p, Rng& rng) const override
    {
        for (int k = 0; k < 2; ++k) {
            auto part = p.subspan(static_cast<std::size_t>(k) * conv_params(), conv_params());
            init_uniform(part.first(g_.weight_count()), g_.patch(), rng);
            std::fill(part.begin() + static_cast<std::ptrdiff_t>(g_.weight_count()), part.end(), 0.0f);
        }
    }

    // cache: [conv1 pre-activation, relu(conv1), pre-activation sum]
    void forward(std::span<const float> p, const Tensor& in, Tensor& out, std::vector<Tensor>& cache) const override
    {
        cache.resize(3);
        const std::size_t n = in.batch();
        const float* w1 = p.data();
        const float* w2 = p.data() + conv_params();
        cache[0].resize(n, in_);
        kernels::conv_forward(g_, n, in.data(), w1, w1 + g_.weight_count(), cache[0].data());
        cache[1].resize(n, in_);
        relu_into(cache[0].data(), cache[1].data(), in.size());
        cache[2].resize(n, in_);
        kernels::conv_forward(g_, n, cache[1].data(), w2, w2 + g_.weight_count(), cache[2].data());
        out.resize(n, in_);
        add_into(in.data(), cache[2].data(), in.size());
        relu_into(cache[2].data(), out.data(), in.size());
    }

    void backward(std::span<const float> p, const Tensor& in, const Tensor&, const std::vector<Tensor>& cache,
                  const Tensor& grad_out, Tensor* grad_in, std::span<float> gp) const override
    {
        const std::size_t n = in.batch();
        const float* w1 = p.data();
        const float* w2 = p.data() + conv_params();
        const bool weights = !gp.empty();
        float* g1 = gp.data();
        float* g2 = weights ? gp.data() + conv_params() : nullptr;

        thread_local Tensor g_sum, g_hidden;
        g_sum.resize(n, in_);
        mask_into(cache[2].data(), grad_out.data(), g_sum.data(), in.size());

        if (weights)
            kernels::conv_backward_weights(g_, n, cache[1].data(), g_sum.data(), g2, g2 + g_.weight_count());
        g_hidden.resize(n, in_);
        kernels::conv_backward_input(g_, n, g_sum.data(), w2, g_hidden.data());
        mask_inplace(cache[0].data(), g_hidden.data(), in.size());

        if (weights)
            kernels::conv_backward_weights(g_, n, in.data(), g_hidden.data(), g1, g1 + g_.weight_count());
        if (grad_in) {
            grad_in->resize(n, in_);
            kernels::conv_backward_input(g_, n, g_hidden.data(), w1, grad_in->data());
            add_into(g_sum.data(), grad_in->data(), in.size());
        }
    }

private:
    ConvGeometry g_;
};

} // namespace

std::shared_ptr<const Layer> make_layer(const LayerSpec& s, Dims in, std::size_t index)
{
    try {
        switch (s.kind) {
        case LayerKind::dense:
            if (s.units == 0)
                throw Error("dense layer with zero outputs");
            return std::make_shared<Dense>(in, s.units);
        case LayerKind::conv2d:
            return std::make_shared<Conv>(in, s);
        case LayerKind::conv_transpose2d:
            return std::make_shared<ConvTranspose>(in, s);
        case LayerKind::relu:
            return std::make_shared<Relu>(in);
        case LayerKind::sigmoid:
            return std::make_shared<Sigmoid>(in);
        case LayerKind::softmax:
            return std::make_shared<Softmax>(in);
        case LayerKind::flatten:
            return std::make_shared<Relabel>(in, Dims{1, 1, in.count()});
        case LayerKind::reshape:
            if (s.shape.count() != in.count())
                throw Error("cannot reshape " + in.str() + " to " + s.shape.str());
            return std::make_shared<Relabel>(in, s.shape);
        case LayerKind::residual_block:
            return std::make_shared<Residual>(in, s.units);
        case LayerKind::batch_norm_free:
            return std::make_shared<Relabel>(in, in);
        }
    } catch (const std::exception& e) {
        throw Error("shape error at layer " + std::to_string(index) + " (" + s.str() + "): " + e.what());
    }
    throw Error("shape error at layer " + std::to_string(index) + ": unknown layer kind");
}

} // namespace rfaug::nn
