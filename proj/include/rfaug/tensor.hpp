// rfaug/tensor.hpp
//
// Batched activations in NHWC order. Every tensor in the network is four
// dimensional: batch, height (time), width (I/Q), channels. Dense
// activations use height = width = 1.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rfaug::nn {

struct Dims {
    std::size_t h = 1;
    std::size_t w = 1;
    std::size_t c = 1;

    std::size_t count() const { return h * w * c; }
    bool operator==(const Dims&) const = default;
    std::string str() const;
};

class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t batch, Dims dims, float fill = 0.0f);
    Tensor(std::size_t batch, Dims dims, std::vector<float> values);

    std::size_t batch() const { return batch_; }
    const Dims& dims() const { return dims_; }
    std::size_t sample_size() const { return dims_.count(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    std::span<float> values() { return data_; }
    std::span<const float> values() const { return data_; }
    std::span<float> sample(std::size_t i) { return {data_.data() + i * sample_size(), sample_size()}; }
    std::span<const float> sample(std::size_t i) const
    {
        return {data_.data() + i * sample_size(), sample_size()};
    }

    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }

    // Changes the per-sample dims without touching data; counts must agree.
    void reshape(Dims dims);
    // Resizes to (batch, dims); contents are unspecified afterwards.
    void resize(std::size_t batch, Dims dims);
    void fill(float v);

    bool all_finite() const;
    Tensor rows(std::span<const std::size_t> indices) const;
    Tensor slice(std::size_t begin, std::size_t end) const;

    bool operator==(const Tensor&) const = default;

private:
    std::size_t batch_ = 0;
    Dims dims_{};
    std::vector<float> data_;
};

} // namespace rfaug::nn
