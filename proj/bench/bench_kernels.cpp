// Parallel (im2col + GEMM, OpenMP) kernels against the serial reference on
// the classifier's layer shapes. Counters report multiply-adds per second.

#include "rfaug/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace k = rfaug::kernels;

namespace {

std::vector<float> random_vector(std::size_t n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::vector<float> v(n);
    for (auto& x : v)
        x = u(rng);
    return v;
}

// First classifier convolution: 256x2x1 input, 32 filters of 3x2.
k::ConvGeometry first_conv()
{
    return k::ConvGeometry::forward(256, 2, 1, 32, 3, 2, 1);
}

// Strided 3x1 convolution over 32 channels.
k::ConvGeometry second_conv()
{
    return k::ConvGeometry::forward(256, 1, 32, 32, 3, 1, 2);
}

using ConvForward = void (*)(const k::ConvGeometry&, std::size_t, const float*, const float*, const float*, float*);
using ConvBackward = void (*)(const k::ConvGeometry&, std::size_t, const float*, const float*, float*, float*);
using DenseForward = void (*)(std::size_t, std::size_t, std::size_t, const float*, const float*, const float*,
                              float*);

void conv_forward(benchmark::State& state, ConvForward f, k::ConvGeometry g)
{
    const auto batch = static_cast<std::size_t>(state.range(0));
    const auto in = random_vector(batch * g.in_count(), 1);
    const auto w = random_vector(g.weight_count(), 2);
    const auto b = random_vector(g.out_c, 3);
    std::vector<float> out(batch * g.out_count());
    for (auto _ : state) {
        f(g, batch, in.data(), w.data(), b.data(), out.data());
        benchmark::DoNotOptimize(out.data());
    }
    state.counters["MAC/s"] = benchmark::Counter(static_cast<double>(batch * g.out_count() * g.patch()),
                                                 benchmark::Counter::kIsIterationInvariantRate);
}

void conv_backward_weights(benchmark::State& state, ConvBackward f, k::ConvGeometry g)
{
    const auto batch = static_cast<std::size_t>(state.range(0));
    const auto in = random_vector(batch * g.in_count(), 1);
    const auto go = random_vector(batch * g.out_count(), 2);
    std::vector<float> gw(g.weight_count()), gb(g.out_c);
    for (auto _ : state) {
        f(g, batch, in.data(), go.data(), gw.data(), gb.data());
        benchmark::DoNotOptimize(gw.data());
    }
    state.counters["MAC/s"] = benchmark::Counter(static_cast<double>(batch * g.out_count() * g.patch()),
                                                 benchmark::Counter::kIsIterationInvariantRate);
}

void dense_forward(benchmark::State& state, DenseForward f)
{
    const auto batch = static_cast<std::size_t>(state.range(0));
    const std::size_t in = 4096, out = 128;
    const auto x = random_vector(batch * in, 1);
    const auto w = random_vector(in * out, 2);
    const auto b = random_vector(out, 3);
    std::vector<float> y(batch * out);
    for (auto _ : state) {
        f(batch, in, out, x.data(), w.data(), b.data(), y.data());
        benchmark::DoNotOptimize(y.data());
    }
    state.counters["MAC/s"] = benchmark::Counter(static_cast<double>(batch * in * out),
                                                 benchmark::Counter::kIsIterationInvariantRate);
}

} // namespace

BENCHMARK_CAPTURE(conv_forward, parallel_first, k::conv_forward, first_conv())->Arg(1)->Arg(64);
BENCHMARK_CAPTURE(conv_forward, reference_first, k::reference::conv_forward, first_conv())->Arg(1)->Arg(64);
BENCHMARK_CAPTURE(conv_forward, parallel_second, k::conv_forward, second_conv())->Arg(1)->Arg(64);
BENCHMARK_CAPTURE(conv_forward, reference_second, k::reference::conv_forward, second_conv())->Arg(1)->Arg(64);
BENCHMARK_CAPTURE(conv_backward_weights, parallel_second, k::conv_backward_weights, second_conv())->Arg(64);
BENCHMARK_CAPTURE(conv_backward_weights, reference_second, k::reference::conv_backward_weights, second_conv())
    ->Arg(64);
BENCHMARK_CAPTURE(dense_forward, parallel, k::dense_forward)->Arg(1)->Arg(64);
BENCHMARK_CAPTURE(dense_forward, reference, k::reference::dense_forward)->Arg(1)->Arg(64);

BENCHMARK_MAIN();
