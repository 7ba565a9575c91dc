// Direct-loop kernels. Serial and deliberately naive: these are the oracle
// the optimized kernels are tested against, and the baseline in the bench.

#include "rfaug/kernels.hpp"

#include <algorithm>

namespace rfaug::kernels::reference {

void conv_forward(const ConvGeometry& g, std::size_t batch, const float* in, const float* weights,
                  const float* bias, float* out)
{
    for (std::size_t n = 0; n < batch; ++n) {
        const float* x = in + n * g.in_count();
        float* y = out + n * g.out_count();
        for (std::size_t oy = 0; oy < g.out_h; ++oy)
            for (std::size_t ox = 0; ox < g.out_w; ++ox)
                for (std::size_t co = 0; co < g.out_c; ++co) {
                    double acc = bias ? bias[co] : 0.0;
                    for (std::size_t ky = 0; ky < g.kh; ++ky) {
                        const long iy = static_cast<long>(oy * g.sh + ky) - static_cast<long>(g.pad);
                        if (iy < 0 || iy >= static_cast<long>(g.in_h))
                            continue;
                        for (std::size_t kx = 0; kx < g.kw; ++kx)
                            for (std::size_t ci = 0; ci < g.in_c; ++ci) {
                                const std::size_t p = (ky * g.kw + kx) * g.in_c + ci;
                                acc += static_cast<double>(x[(iy * g.in_w + ox + kx) * g.in_c + ci]) *
                                       weights[p * g.out_c + co];
                            }
                    }
                    y[(oy * g.out_w + ox) * g.out_c + co] = static_cast<float>(acc);
                }
    }
}

void conv_backward_input(const ConvGeometry& g, std::size_t batch, const float* grad_out, const float* weights,
                         float* grad_in)
{
    std::fill(grad_in, grad_in + batch * g.in_count(), 0.0f);
    for (std::size_t n = 0; n < batch; ++n) {
        const float* dy = grad_out + n * g.out_count();
        float* dx = grad_in + n * g.in_count();
        for (std::size_t oy = 0; oy < g.out_h; ++oy)
            for (std::size_t ox = 0; ox < g.out_w; ++ox)
                for (std::size_t ky = 0; ky < g.kh; ++ky) {
                    const long iy = static_cast<long>(oy * g.sh + ky) - static_cast<long>(g.pad);
                    if (iy < 0 || iy >= static_cast<long>(g.in_h))
                        continue;
                    for (std::size_t kx = 0; kx < g.kw; ++kx)
                        for (std::size_t ci = 0; ci < g.in_c; ++ci) {
                            const std::size_t p = (ky * g.kw + kx) * g.in_c + ci;
                            double acc = 0.0;
                            for (std::size_t co = 0; co < g.out_c; ++co)
                                acc += static_cast<double>(dy[(oy * g.out_w + ox) * g.out_c + co]) *
                                       weights[p * g.out_c + co];
                            dx[(iy * g.in_w + ox + kx) * g.in_c + ci] += static_cast<float>(acc);
                        }
                }
    }
}

void conv_backward_weights(const ConvGeometry& g, std::size_t batch, const float* in, const float* grad_out,
                           float* grad_w, float* grad_b)
{
    for (std::size_t n = 0; n < batch; ++n) {
        const float* x = in + n * g.in_count();
        const float* dy = grad_out + n * g.out_count();
        for (std::size_t oy = 0; oy < g.out_h; ++oy)
            for (std::size_t ox = 0; ox < g.out_w; ++ox)
                for (std::size_t co = 0; co < g.out_c; ++co) {
                    const float d = dy[(oy * g.out_w + ox) * g.out_c + co];
                    if (grad_b)
                        grad_b[co] += d;
                    for (std::size_t ky = 0; ky < g.kh; ++ky) {
                        const long iy = static_cast<long>(oy * g.sh + ky) - static_cast<long>(g.pad);
                        if (iy < 0 || iy >= static_cast<long>(g.in_h))
                            continue;
                        for (std::size_t kx = 0; kx < g.kw; ++kx)
                            for (std::size_t ci = 0; ci < g.in_c; ++ci) {
                                const std::size_t p = (ky * g.kw + kx) * g.in_c + ci;
                                grad_w[p * g.out_c + co] += x[(iy * g.in_w + ox + kx) * g.in_c + ci] * d;
                            }
                    }
                }
    }
}

void dense_forward(std::size_t batch, std::size_t in, std::size_t out, const float* x, const float* w,
                   const float* b, float* y)
{
    for (std::size_t n = 0; n < batch; ++n)
        for (std::size_t o = 0; o < out; ++o) {
            double acc = b ? b[o] : 0.0;
            for (std::size_t i = 0; i < in; ++i)
                acc += static_cast<double>(x[n * in + i]) * w[i * out + o];
            y[n * out + o] = static_cast<float>(acc);
        }
}

void dense_backward(std::size_t batch, std::size_t in, std::size_t out, const float* x, const float* w,
                    const float* grad_y, float* grad_x, float* grad_w, float* grad_b)
{
    for (std::size_t n = 0; n < batch; ++n) {
        for (std::size_t i = 0; i < in; ++i) {
            double acc = 0.0;
            for (std::size_t o = 0; o < out; ++o) {
                acc += static_cast<double>(grad_y[n * out + o]) * w[i * out + o];
                grad_w[i * out + o] += x[n * in + i] * grad_y[n * out + o];
            }
            if (grad_x)
                grad_x[n * in + i] = static_cast<float>(acc);
        }
        if (grad_b)
            for (std::size_t o = 0; o < out; ++o)
                grad_b[o] += grad_y[n * out + o];
    }
}

} // namespace rfaug::kernels::reference
