#include "rfaug/tensor.hpp"

#include "rfaug/error.hpp"

#include <algorithm>
#include <cmath>

namespace rfaug::nn {

std::string Dims::str() const
{
    return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c);
}

Tensor::Tensor(std::size_t batch, Dims dims, float fill)
    : batch_(batch), dims_(dims), data_(batch * dims.count(), fill)
{
}

Tensor::Tensor(std::size_t batch, Dims dims, std::vector<float> values)
    : batch_(batch), dims_(dims), data_(std::move(values))
{
    if (data_.size() != batch * dims.count())
        throw Error("shape error: " + std::to_string(data_.size()) + " values for batch " +
                    std::to_string(batch) + " of " + dims.str());
}

void Tensor::reshape(Dims dims)
{
    if (dims.count() != dims_.count())
        throw Error("shape error: cannot reshape " + dims_.str() + " to " + dims.str());
    dims_ = dims;
}

void Tensor::resize(std::size_t batch, Dims dims)
{
    batch_ = batch;
    dims_ = dims;
    data_.resize(batch * dims.count());
}

void Tensor::fill(float v)
{
    std::fill(data_.begin(), data_.end(), v);
}

bool Tensor::all_finite() const
{
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

Tensor Tensor::rows(std::span<const std::size_t> indices) const
{
    Tensor out(indices.size(), dims_);
    const std::size_t n = sample_size();
    for (std::size_t i = 0; i < indices.size(); ++i)
        std::copy_n(data_.data() + indices[i] * n, n, out.data_.data() + i * n);
    return out;
}

Tensor Tensor::slice(std::size_t begin, std::size_t end) const
{
    const std::size_t n = sample_size();
    Tensor out(end - begin, dims_);
    std::copy(data_.begin() + static_cast<std::ptrdiff_t>(begin * n),
              data_.begin() + static_cast<std::ptrdiff_t>(end * n), out.data_.begin());
    return out;
}

} // namespace rfaug::nn
