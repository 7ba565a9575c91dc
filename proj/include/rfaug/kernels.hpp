// rfaug/kernels.hpp
//
// Compute kernels behind the dense and convolution layers. Two
// implementations share one signature set:
//
//   rfaug::kernels            im2col + GEMM, OpenMP over the batch
//   rfaug::kernels::reference direct loops, serial; kept as the test oracle
//
// Convolutions slide along time only. Time is zero padded by (kh-1)/2 on
// both sides; width is never padded, so out_w = in_w - kw + 1.
//
// Weights are stored row-major as (kh * kw * in_c) x out_c with patch index
// ((ky * kw) + kx) * in_c + ci.

#pragma once

#include <cstddef>

namespace rfaug::kernels {

struct ConvGeometry {
    std::size_t in_h = 0, in_w = 0, in_c = 0;
    std::size_t out_h = 0, out_w = 0, out_c = 0;
    std::size_t kh = 1, kw = 1, sh = 1, pad = 0;

    // Geometry of a convolution applied to an (in_h, in_w, in_c) input.
    static ConvGeometry forward(std::size_t in_h, std::size_t in_w, std::size_t in_c, std::size_t filters,
                                std::size_t kh, std::size_t kw, std::size_t sh);

    std::size_t patch() const { return kh * kw * in_c; }
    std::size_t in_count() const { return in_h * in_w * in_c; }
    std::size_t out_count() const { return out_h * out_w * out_c; }
    std::size_t weight_count() const { return patch() * out_c; }
};

// out[n] = conv(in[n]) + bias. out is overwritten.
void conv_forward(const ConvGeometry& g, std::size_t batch, const float* in, const float* weights,
                  const float* bias, float* out);
// grad_in is overwritten with the adjoint of conv_forward (without bias).
void conv_backward_input(const ConvGeometry& g, std::size_t batch, const float* grad_out, const float* weights,
                         float* grad_in);
// Accumulates into grad_w and (if non-null) grad_b.
void conv_backward_weights(const ConvGeometry& g, std::size_t batch, const float* in, const float* grad_out,
                           float* grad_w, float* grad_b);

// y = x W + b with W (in x out) row-major. y is overwritten.
void dense_forward(std::size_t batch, std::size_t in, std::size_t out, const float* x, const float* w,
                   const float* b, float* y);
// grad_x overwritten; grad_w and grad_b accumulated.
void dense_backward(std::size_t batch, std::size_t in, std::size_t out, const float* x, const float* w,
                    const float* grad_y, float* grad_x, float* grad_w, float* grad_b);

namespace reference {

void conv_forward(const ConvGeometry& g, std::size_t batch, const float* in, const float* weights,
                  const float* bias, float* out);
void conv_backward_input(const ConvGeometry& g, std::size_t batch, const float* grad_out, const float* weights,
                         float* grad_in);
void conv_backward_weights(const ConvGeometry& g, std::size_t batch, const float* in, const float* grad_out,
                           float* grad_w, float* grad_b);
void dense_forward(std::size_t batch, std::size_t in, std::size_t out, const float* x, const float* w,
                   const float* b, float* y);
void dense_backward(std::size_t batch, std::size_t in, std::size_t out, const float* x, const float* w,
                    const float* grad_y, float* grad_x, float* grad_w, float* grad_b);

} // namespace reference

} // namespace rfaug::kernels
