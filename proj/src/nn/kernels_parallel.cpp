// im2col + GEMM kernels. The patch matrix is built per sample in parallel;
// the products go through Eigen. Each output element is produced by exactly
// one thread, so results do not depend on the thread count.

#include "rfaug/kernels.hpp"

#include "rfaug/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <string>
#include <vector>

namespace rfaug::kernels {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;
using CMapVec = Eigen::Map<const Eigen::RowVectorXf>;
using MapVec = Eigen::Map<Eigen::RowVectorXf>;

// Column sums in a fixed row order. Eigen's vectorized reductions peel by
// pointer alignment, which would make results depend on where buffers land.
void add_column_sums(const float* m, std::size_t rows, std::size_t cols, float* acc)
{
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            acc[c] += m[r * cols + c];
}

std::vector<float>& scratch()
{
    thread_local std::vector<float> buf;
    return buf;
}

constexpr std::size_t chunk_floats = 64 * 1024;

bool is_pointwise(const ConvGeometry& g)
{
    return g.kh == 1 && g.kw == 1 && g.sh == 1 && g.pad == 0;
}

// cols has (batch * out_h * out_w) rows of patch() values each.
void im2col(const ConvGeometry& g, std::size_t batch, const float* in, float* cols)
{
    const long nb = static_cast<long>(batch);
#pragma omp parallel for schedule(static)
    for (long n = 0; n < nb; ++n) {
        const float* x = in + n * g.in_count();
        float* row = cols + static_cast<std::size_t>(n) * g.out_h * g.out_w * g.patch();
        for (std::size_t oy = 0; oy < g.out_h; ++oy)
            for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                for (std::size_t ky = 0; ky < g.kh; ++ky) {
                    const long iy = static_cast<long>(oy * g.sh + ky) - static_cast<long>(g.pad);
                    float* dst = row + ky * g.kw * g.in_c;
                    if (iy < 0 || iy >= static_cast<long>(g.in_h)) {
                        std::fill_n(dst, g.kw * g.in_c, 0.0f);
                        continue;
                    }
                    std::copy_n(x + (static_cast<std::size_t>(iy) * g.in_w + ox) * g.in_c, g.kw * g.in_c, dst);
                }
                row += g.patch();
            }
    }
}

// Scatter-adds patch rows back onto a zeroed input grid.
void col2im(const ConvGeometry& g, std::size_t batch, const float* cols, float* out)
{
    const long nb = static_cast<long>(batch);
#pragma omp parallel for schedule(static)
    for (long n = 0; n < nb; ++n) {
        float* x = out + n * g.in_count();
        std::fill_n(x, g.in_count(), 0.0f);
        const float* row = cols + static_cast<std::size_t>(n) * g.out_h * g.out_w * g.patch();
        for (std::size_t oy = 0; oy < g.out_h; ++oy)
            for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                for (std::size_t ky = 0; ky < g.kh; ++ky) {
                    const long iy = static_cast<long>(oy * g.sh + ky) - static_cast<long>(g.pad);
                    if (iy < 0 || iy >= static_cast<long>(g.in_h))
                        continue;
                    const float* src = row + ky * g.kw * g.in_c;
                    float* dst = x + (static_cast<std::size_t>(iy) * g.in_w + ox) * g.in_c;
                    for (std::size_t k = 0; k < g.kw * g.in_c; ++k)
                        dst[k] += src[k];
                }
                row += g.patch();
            }
    }
}

// Samples per im2col chunk, sized so the patch buffer stays in L2. The
// full-batch patch matrix for the residual layers is several MB and turns
// the products memory-bound.
std::size_t chunk_samples(const ConvGeometry& g)
{
    const std::size_t per_sample = g.out_h * g.out_w * g.patch();
    return std::max<std::size_t>(1, chunk_floats / per_sample);
}

} // namespace

ConvGeometry ConvGeometry::forward(std::size_t in_h, std::size_t in_w, std::size_t in_c, std::size_t filters,
                                   std::size_t kh, std::size_t kw, std::size_t sh)
{
    ConvGeometry g;
    g.in_h = in_h;
    g.in_w = in_w;
    g.in_c = in_c;
    g.kh = kh;
    g.kw = kw;
    g.sh = sh;
    g.pad = (kh - 1) / 2;
    if (kh == 0 || kw == 0 || sh == 0 || filters == 0 || in_c == 0)
        throw Error("shape error: zero-sized convolution");
    if (in_h + 2 * g.pad < kh || in_w < kw)
        throw Error("shape error: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                    " larger than input " + std::to_string(in_h) + "x" + std::to_string(in_w));
    g.out_h = (in_h + 2 * g.pad - kh) / sh + 1;
    g.out_w = in_w - kw + 1;
    g.out_c = filters;
    return g;
}

void conv_forward(const ConvGeometry& g, std::size_t batch, const float* in, const float* weights,
                  const float* bias, float* out)
{
    const auto patch = static_cast<Eigen::Index>(g.patch());
    const auto oc = static_cast<Eigen::Index>(g.out_c);
    CMapMat w(weights, patch, oc);
    const std::size_t out_rows = g.out_h * g.out_w;
    if (is_pointwise(g)) {
        const auto rows = static_cast<Eigen::Index>(batch * out_rows);
        MapMat(out, rows, oc).noalias() = CMapMat(in, rows, patch) * w;
    } else {
        auto& cols = scratch();
        const std::size_t step = chunk_samples(g);
        cols.resize(std::min(step, batch) * out_rows * g.patch());
        for (std::size_t n0 = 0; n0 < batch; n0 += step) {
            const std::size_t nb = std::min(step, batch - n0);
            const auto rows = static_cast<Eigen::Index>(nb * out_rows);
            im2col(g, nb, in + n0 * g.in_count(), cols.data());
            MapMat(out + n0 * out_rows * g.out_c, rows, oc).noalias() = CMapMat(cols.data(), rows, patch) * w;
        }
    }
    if (bias)
        MapMat(out, static_cast<Eigen::Index>(batch * out_rows), oc).rowwise() += CMapVec(bias, oc);
}

void conv_backward_input(const ConvGeometry& g, std::size_t batch, const float* grad_out, const float* weights,
                         float* grad_in)
{
    const auto patch = static_cast<Eigen::Index>(g.patch());
    const auto oc = static_cast<Eigen::Index>(g.out_c);
    CMapMat w(weights, patch, oc);
    const std::size_t out_rows = g.out_h * g.out_w;
    if (is_pointwise(g)) {
        const auto rows = static_cast<Eigen::Index>(batch * out_rows);
        MapMat(grad_in, rows, patch).noalias() = CMapMat(grad_out, rows, oc) * w.transpose();
        return;
    }
    auto& cols = scratch();
    const std::size_t step = chunk_samples(g);
    cols.resize(std::min(step, batch) * out_rows * g.patch());
    for (std::size_t n0 = 0; n0 < batch; n0 += step) {
        const std::size_t nb = std::min(step, batch - n0);
        const auto rows = static_cast<Eigen::Index>(nb * out_rows);
        MapMat(cols.data(), rows, patch).noalias() = CMapMat(grad_out + n0 * out_rows * g.out_c, rows, oc) *
                                                     w.transpose();
        col2im(g, nb, cols.data(), grad_in + n0 * g.in_count());
    }
}

void conv_backward_weights(const ConvGeometry& g, std::size_t batch, const float* in, const float* grad_out,
                           float* grad_w, float* grad_b)
{
    const auto patch = static_cast<Eigen::Index>(g.patch());
    const auto oc = static_cast<Eigen::Index>(g.out_c);
    MapMat dw(grad_w, patch, oc);
    const std::size_t out_rows = g.out_h * g.out_w;
    if (is_pointwise(g)) {
        const auto rows = static_cast<Eigen::Index>(batch * out_rows);
        dw.noalias() += CMapMat(in, rows, patch).transpose() * CMapMat(grad_out, rows, oc);
    } else {
        auto& cols = scratch();
        const std::size_t step = chunk_samples(g);
        cols.resize(std::min(step, batch) * out_rows * g.patch());
        for (std::size_t n0 = 0; n0 < batch; n0 += step) {
            const std::size_t nb = std::min(step, batch - n0);
            const auto rows = static_cast<Eigen::Index>(nb * out_rows);
            im2col(g, nb, in + n0 * g.in_count(), cols.data());
            dw.noalias() += CMapMat(cols.data(), rows, patch).transpose() *
                            CMapMat(grad_out + n0 * out_rows * g.out_c, rows, oc);
        }
    }
    if (grad_b)
        add_column_sums(grad_out, batch * out_rows, g.out_c, grad_b);
}

void dense_forward(std::size_t batch, std::size_t in, std::size_t out, const float* x, const float* w,
                   const float* b, float* y)
{
    const auto nb = static_cast<Eigen::Index>(batch);
    const auto ni = static_cast<Eigen::Index>(in);
    const auto no = static_cast<Eigen::Index>(out);
    MapMat ym(y, nb, no);
    ym.noalias() = CMapMat(x, nb, ni) * CMapMat(w, ni, no);
    if (b)
        ym.rowwise() += CMapVec(b, no);
}

void dense_backward(std::size_t batch, std::size_t in, std::size_t out, const float* x, const float* w,
                    const float* grad_y, float* grad_x, float* grad_w, float* grad_b)
{
    const auto nb = static_cast<Eigen::Index>(batch);
    const auto ni = static_cast<Eigen::Index>(in);
    const auto no = static_cast<Eigen::Index>(out);
    CMapMat dy(grad_y, nb, no);
    if (grad_x)
        MapMat(grad_x, nb, ni).noalias() = dy * CMapMat(w, ni, no).transpose();
    if (grad_w)
        MapMat(grad_w, ni, no).noalias() += CMapMat(x, nb, ni).transpose() * dy;
    if (grad_b)
        add_column_sums(grad_y, batch, out, grad_b);
}

} // namespace rfaug::kernels
