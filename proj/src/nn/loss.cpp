#include "rfaug/loss.hpp"

#include "rfaug/error.hpp"

#include <algorithm>
#include <cmath>

namespace rfaug::nn {

namespace {

void check(const Tensor& p, const Tensor& t)
{
    if (p.batch() != t.batch() || p.dims() != t.dims())
        throw Error("shape error: loss prediction " + p.dims().str() + " vs target " + t.dims().str());
    if (p.batch() == 0)
        throw Error("shape error: empty loss batch");
    if (!p.all_finite() || !t.all_finite())
        throw Error("non-finite loss input");
}

LossGrad compute(LossKind kind, const Tensor& p, const Tensor& t, bool want_grad)
{
    check(p, t);
    LossGrad r;
    if (want_grad)
        r.grad_prediction = Tensor(p.batch(), p.dims());
    const std::size_t n = p.size();
    const double batch = static_cast<double>(p.batch());
    double acc = 0.0;

    switch (kind) {
    case LossKind::mse:
        for (std::size_t i = 0; i < n; ++i) {
            const double d = static_cast<double>(p[i]) - t[i];
            acc += d * d;
            if (want_grad)
                r.grad_prediction[i] = static_cast<float>(2.0 * d / static_cast<double>(n));
        }
        r.value = acc / static_cast<double>(n);
        break;
    case LossKind::bce:
        for (std::size_t i = 0; i < n; ++i) {
            const double q = std::clamp<double>(p[i], probability_clamp, 1.0 - probability_clamp);
            const double y = t[i];
            acc -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
            if (want_grad)
                r.grad_prediction[i] = static_cast<float>((q - y) / (q * (1.0 - q)) / static_cast<double>(n));
        }
        r.value = acc / static_cast<double>(n);
        break;
    case LossKind::cross_entropy:
        for (std::size_t i = 0; i < n; ++i) {
            const double q = std::max<double>(p[i], probability_clamp);
            acc -= t[i] * std::log(q);
            if (want_grad)
                r.grad_prediction[i] = p[i] > probability_clamp ? static_cast<float>(-t[i] / q / batch) : 0.0f;
        }
        r.value = acc / batch;
        break;
    case LossKind::gaussian_kl:
        if (want_grad)
            r.grad_target = Tensor(t.batch(), t.dims());
        for (std::size_t i = 0; i < n; ++i) {
            const double mu = p[i];
            const double lv = t[i];
            acc += 0.5 * (mu * mu + std::exp(lv) - 1.0 - lv);
            if (want_grad) {
                r.grad_prediction[i] = static_cast<float>(mu / batch);
                r.grad_target[i] = static_cast<float>(0.5 * (std::exp(lv) - 1.0) / batch);
            }
        }
        r.value = acc / batch;
        break;
    }
    // Rounding can leave a KL of a hair below zero at the exact optimum.
    r.value = std::max(r.value, 0.0);
    return r;
}

} // namespace

double loss(LossKind kind, const Tensor& prediction, const Tensor& target)
{
    return compute(kind, prediction, target, false).value;
}

LossGrad loss_grad(LossKind kind, const Tensor& prediction, const Tensor& target)
{
    return compute(kind, prediction, target, true);
}

} // namespace rfaug::nn

namespace rfaug::nn {

Tensor softmax(const Tensor& logits)
{
    Tensor out(logits.batch(), logits.dims());
    const std::size_t n = logits.sample_size();
    for (std::size_t b = 0; b < logits.batch(); ++b) {
        auto x = logits.sample(b);
        auto y = out.sample(b);
        const float m = *std::max_element(x.begin(), x.end());
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            sum += std::exp(static_cast<double>(x[i]) - m);
        for (std::size_t i = 0; i < n; ++i)
            y[i] = static_cast<float>(std::exp(static_cast<double>(x[i]) - m) / sum);
    }
    return out;
}

Tensor sigmoid(const Tensor& logits)
{
    Tensor out(logits.batch(), logits.dims());
    for (std::size_t i = 0; i < logits.size(); ++i)
        out[i] = static_cast<float>(1.0 / (1.0 + std::exp(-static_cast<double>(logits[i]))));
    return out;
}

LossGrad softmax_cross_entropy(const Tensor& logits, const Tensor& target)
{
    check(logits, target);
    LossGrad r;
    r.grad_prediction = Tensor(logits.batch(), logits.dims());
    const std::size_t n = logits.sample_size();
    const double batch = static_cast<double>(logits.batch());
    double acc = 0.0;
    for (std::size_t b = 0; b < logits.batch(); ++b) {
        auto x = logits.sample(b);
        auto t = target.sample(b);
        auto g = r.grad_prediction.sample(b);
        const double m = *std::max_element(x.begin(), x.end());
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            sum += std::exp(x[i] - m);
        const double lse = m + std::log(sum);
        double tsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc -= t[i] * (x[i] - lse);
            tsum += t[i];
        }
        for (std::size_t i = 0; i < n; ++i)
            g[i] = static_cast<float>((std::exp(x[i] - lse) * tsum - t[i]) / batch);
    }
    r.value = std::max(acc / batch, 0.0);
    return r;
}

LossGrad sigmoid_bce(const Tensor& logits, const Tensor& target)
{
    check(logits, target);
    LossGrad r;
    r.grad_prediction = Tensor(logits.batch(), logits.dims());
    const std::size_t n = logits.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = logits[i];
        const double y = target[i];
        // log(1 + e^x) - y x, written to avoid overflow
        acc += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
        const double p = 1.0 / (1.0 + std::exp(-x));
        r.grad_prediction[i] = static_cast<float>((p - y) / static_cast<double>(n));
    }
    r.value = acc / static_cast<double>(n);
    return r;
}

} // namespace rfaug::nn
