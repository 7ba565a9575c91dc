// Central finite-difference oracle shared by the gradient tests. Kept free
// of any library backward code so it stays independent of what it checks.

#pragma once

#include "rfaug/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace rfaug::testing {

// Normwise relative error max|a - n| / max(max|a|, max|n|).
inline double relative_error(std::span<const float> analytic, std::span<const double> numeric)
{
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
        scale = std::max({scale, std::abs(static_cast<double>(analytic[i])), std::abs(numeric[i])});
    }
    return scale == 0.0 ? diff : diff / scale;
}

// d f / d x[i] by central differences, x perturbed in place and restored.
inline std::vector<double> numeric_gradient(std::span<float> x, const std::function<double()>& f, double h = 1e-3)
{
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const float saved = x[i];
        const float hi = static_cast<float>(saved + h);
        const float lo = static_cast<float>(saved - h);
        x[i] = hi;
        const double up = f();
        x[i] = lo;
        const double down = f();
        x[i] = saved;
        g[i] = (up - down) / (static_cast<double>(hi) - static_cast<double>(lo));
    }
    return g;
}

inline nn::Tensor random_tensor(std::size_t batch, nn::Dims dims, std::mt19937_64& rng, float lo = -1.0f,
                                float hi = 1.0f)
{
    std::uniform_real_distribution<float> d(lo, hi);
    nn::Tensor t(batch, dims);
    for (auto& v : t.values())
        v = d(rng);
    return t;
}

} // namespace rfaug::testing
