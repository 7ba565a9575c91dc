#include "gradcheck.hpp"
#include "rfaug/architectures.hpp"
#include "rfaug/error.hpp"
#include "rfaug/loss.hpp"
#include "rfaug/model_io.hpp"
#include "rfaug/network.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>

using namespace rfaug::nn;
using rfaug::testing::numeric_gradient;
using rfaug::testing::random_tensor;
using rfaug::testing::relative_error;

namespace {

// Probe loss sum(r * y): its gradient with respect to y is r.
double probe(const Network& net, std::span<const float> params, const Tensor& x, const Tensor& r)
{
    const Tensor y = net.forward(params, x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        s += static_cast<double>(y[i]) * r[i];
    return s;
}

struct GradReport {
    double params = 0.0;
    double input = 0.0;
};

GradReport check_network(const Network& net, std::size_t batch, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto params = net.init_params(seed);
    std::normal_distribution<float> jitter(0.0f, 0.1f);
    for (auto& p : params)
        p += jitter(rng);
    Tensor x = random_tensor(batch, net.input_dims(), rng);
    const Tensor r = random_tensor(batch, net.output_dims(), rng);

    Activations acts;
    net.forward(params, x, acts);
    std::vector<float> gp(net.param_count());
    Tensor gx;
    net.backward(params, acts, r, gp, &gx);

    GradReport rep;
    if (!params.empty()) {
        auto num = numeric_gradient(params, [&] { return probe(net, params, x, r); });
        rep.params = relative_error(gp, num);
    }
    auto num_x = numeric_gradient(x.values(), [&] { return probe(net, params, x, r); });
    rep.input = relative_error(gx.values(), num_x);
    return rep;
}

} // namespace

TEST_CASE("dense layer with zero weights outputs zero")
{
    Network net({1, 1, 4}, {LayerSpec::dense(3)});
    std::vector<float> params(net.param_count(), 0.0f);
    Tensor x(2, {1, 1, 4}, 1.5f);
    const Tensor y = net.forward(params, x);
    for (float v : y.values())
        CHECK(v == 0.0f);
}

TEST_CASE("softmax of equal logits is uniform and rows sum to one")
{
    Network net({1, 1, 3}, {LayerSpec::softmax()});
    const Tensor y = net.forward({}, Tensor(1, {1, 1, 3}, 0.0f));
    for (float v : y.values())
        CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-6));

    std::mt19937_64 rng(2);
    Network wide({1, 1, 9}, {LayerSpec::softmax()});
    const Tensor z = wide.forward({}, random_tensor(6, {1, 1, 9}, rng, -20.0f, 20.0f));
    for (std::size_t b = 0; b < z.batch(); ++b) {
        double s = 0.0;
        for (float v : z.sample(b))
            s += v;
        CHECK(std::abs(s - 1.0) < 1e-5);
    }
}

TEST_CASE("unit 1x1 convolution is the identity")
{
    Network net({8, 2, 1}, {LayerSpec::conv(1, 1, 1, 1)});
    std::vector<float> params{1.0f, 0.0f};
    std::mt19937_64 rng(1);
    const Tensor x = random_tensor(3, {8, 2, 1}, rng);
    CHECK(net.forward(params, x) == x);
}

TEST_CASE("shape errors name the layer")
{
    CHECK_THROWS_WITH_AS(Network({256, 2, 1}, {LayerSpec::conv(8, 3, 2), LayerSpec::residual(16)}),
                         doctest::Contains("shape error at layer 1"), rfaug::Error);
    CHECK_THROWS_WITH_AS(Network({4, 1, 1}, {LayerSpec::reshape({3, 1, 1})}),
                         doctest::Contains("shape error at layer 0"), rfaug::Error);
    Network net({4, 2, 1}, {LayerSpec::flatten(), LayerSpec::dense(2)});
    auto params = net.init_params(1);
    CHECK_THROWS_WITH_AS(net.forward(params, Tensor(1, {4, 1, 2})), doctest::Contains("shape error at layer 0"),
                         rfaug::Error);
}

TEST_CASE("dense input gradient of sum(y) is the row sum of W")
{
    Network net({1, 1, 3}, {LayerSpec::dense(2)});
    std::vector<float> params{1, 2, 3, 4, 5, 6, 0.5f, -0.5f}; // W is 3x2 (in x out), then bias
    Activations acts;
    net.forward(params, Tensor(1, {1, 1, 3}, 0.3f), acts);
    std::vector<float> gp(net.param_count());
    Tensor gx;
    net.backward(params, acts, Tensor(1, {1, 1, 2}, 1.0f), gp, &gx);
    CHECK(gx[0] == doctest::Approx(3.0));
    CHECK(gx[1] == doctest::Approx(7.0));
    CHECK(gx[2] == doctest::Approx(11.0));
}

TEST_CASE("zero output gradient gives zero gradients")
{
    Network net({8, 2, 1}, {LayerSpec::conv(4, 3, 2), LayerSpec::relu(), LayerSpec::flatten(), LayerSpec::dense(3)});
    auto params = net.init_params(4);
    std::mt19937_64 rng(4);
    Activations acts;
    const Tensor x = random_tensor(2, net.input_dims(), rng);
    net.forward(params, x, acts);
    const double l = loss(LossKind::mse, acts.output(), acts.output());
    CHECK(l == 0.0);
    auto lg = loss_grad(LossKind::mse, acts.output(), acts.output());
    std::vector<float> gp(net.param_count(), 1.0f);
    Tensor gx;
    net.backward(params, acts, lg.grad_prediction, gp, &gx);
    for (float g : gp)
        CHECK(g == 0.0f);
    for (float g : gx.values())
        CHECK(g == 0.0f);
}

TEST_CASE("every layer kind passes the finite-difference gradient check")
{
    struct Case {
        const char* name;
        Dims in;
        std::vector<LayerSpec> specs;
    };
    const std::vector<Case> cases = {
        {"dense", {1, 1, 5}, {LayerSpec::dense(4)}},
        {"conv2d", {12, 2, 2}, {LayerSpec::conv(3, 5, 2, 2)}},
        {"conv2d stride 1", {9, 1, 3}, {LayerSpec::conv(2, 3, 1, 1)}},
        {"conv_transpose2d", {6, 1, 3}, {LayerSpec::conv_t(2, 5, 2, 2)}},
        {"conv_transpose2d pointwise", {5, 2, 3}, {LayerSpec::conv_t(2, 1, 1, 1)}},
        {"relu", {4, 2, 2}, {LayerSpec::relu()}},
        {"sigmoid", {3, 1, 4}, {LayerSpec::sigmoid()}},
        {"softmax", {1, 1, 6}, {LayerSpec::softmax()}},
        {"flatten", {3, 2, 2}, {LayerSpec::flatten(), LayerSpec::dense(3)}},
        {"reshape", {1, 1, 12}, {LayerSpec::reshape({3, 1, 4}), LayerSpec::conv(2, 3, 1)}},
        {"residual_block", {10, 1, 3}, {LayerSpec::residual(3)}},
        {"batch_norm_free", {2, 2, 2}, {LayerSpec::batch_norm_free(), LayerSpec::sigmoid()}},
    };
    for (const auto& c : cases) {
        CAPTURE(c.name);
        Network net(c.in, c.specs);
        const auto rep = check_network(net, 2, 17);
        CHECK(rep.params < 1e-3);
        CHECK(rep.input < 1e-3);
    }
}

TEST_CASE("every loss passes the finite-difference gradient check")
{
    std::mt19937_64 rng(8);
    const Dims d{1, 1, 5};
    for (auto kind : {LossKind::mse, LossKind::bce, LossKind::cross_entropy, LossKind::gaussian_kl}) {
        CAPTURE(static_cast<int>(kind));
        Tensor p = random_tensor(3, d, rng, 0.05f, 0.95f);
        Tensor t = random_tensor(3, d, rng, 0.0f, 1.0f);
        if (kind == LossKind::cross_entropy)
            for (std::size_t b = 0; b < 3; ++b) {
                double s = 0.0;
                for (float v : t.sample(b))
                    s += v;
                for (auto& v : t.sample(b))
                    v = static_cast<float>(v / s);
            }
        const auto lg = loss_grad(kind, p, t);
        auto num = numeric_gradient(p.values(), [&] { return loss(kind, p, t); });
        CHECK(relative_error(lg.grad_prediction.values(), num) < 1e-3);
        if (kind == LossKind::gaussian_kl) {
            auto num_t = numeric_gradient(t.values(), [&] { return loss(kind, p, t); });
            CHECK(relative_error(lg.grad_target.values(), num_t) < 1e-3);
        }
    }
    for (bool softmax_head : {true, false}) {
        Tensor logits = random_tensor(3, d, rng, -3.0f, 3.0f);
        Tensor t = random_tensor(3, d, rng, 0.0f, 1.0f);
        auto f = [&] {
            return softmax_head ? softmax_cross_entropy(logits, t).value : sigmoid_bce(logits, t).value;
        };
        const auto lg = softmax_head ? softmax_cross_entropy(logits, t) : sigmoid_bce(logits, t);
        auto num = numeric_gradient(logits.values(), f);
        CHECK(relative_error(lg.grad_prediction.values(), num) < 1e-3);
    }
}

TEST_CASE("loss values at their minima")
{
    std::mt19937_64 rng(9);
    const Tensor x = random_tensor(4, {1, 1, 6}, rng);
    CHECK(loss(LossKind::mse, x, x) == 0.0);

    Tensor onehot(1, {1, 1, 4}, 0.0f);
    onehot[3] = 1.0f;
    CHECK(loss(LossKind::cross_entropy, onehot, onehot) <= 1e-6);

    Tensor zeros(2, {1, 1, 8}, 0.0f);
    CHECK(loss(LossKind::gaussian_kl, zeros, zeros) == 0.0);

    Tensor p(1, {1, 1, 3}, 0.25f);
    p[2] = 0.5f;
    Tensor t(1, {1, 1, 3}, 0.0f);
    t[2] = 1.0f;
    CHECK(loss(LossKind::cross_entropy, p, t) == doctest::Approx(-std::log(0.5)));

    Tensor bad(1, {1, 1, 3}, 0.5f);
    bad[1] = std::nanf("");
    CHECK_THROWS_WITH_AS(loss(LossKind::mse, bad, t), "non-finite loss input", rfaug::Error);
}

TEST_CASE("parameter files round trip and refuse a different network")
{
    Network net({4, 2, 1}, {LayerSpec::flatten(), LayerSpec::dense(3)});
    Network other({4, 2, 1}, {LayerSpec::flatten(), LayerSpec::dense(4)});
    const auto params = net.init_params(21);
    const auto path = std::filesystem::temp_directory_path() / "rfaug_params_test.ornn";
    save_params(path, net, params);
    CHECK(load_params(path, net) == params);
    CHECK_THROWS_WITH_AS(load_params(path, other), doctest::Contains("spec hash mismatch"), rfaug::Error);
    std::filesystem::remove(path);
}

TEST_CASE("input-only backward matches the full backward")
{
    const auto net = rfaug::arch::classifier(4);
    const auto params = net.init_params(3);
    std::mt19937_64 rng(5);
    const auto x = random_tensor(3, rfaug::arch::signal_dims, rng);
    Activations acts;
    net.forward(params, x, acts);
    const auto g = random_tensor(3, net.output_dims(), rng);
    std::vector<float> gp(net.param_count());
    Tensor full, only;
    net.backward(params, acts, g, gp, &full);
    net.backward(params, acts, g, {}, &only);
    CHECK(full == only);
}

TEST_CASE("results do not depend on buffer alignment")
{
    const auto net = rfaug::arch::classifier(3);
    const auto params = net.init_params(8);
    std::mt19937_64 rng(2);
    for (std::size_t batch : {1, 5}) {
        const auto x = random_tensor(batch, rfaug::arch::signal_dims, rng);
        const auto g = random_tensor(batch, net.output_dims(), rng);
        std::vector<float> first_grads;
        Tensor first_out;
        for (std::size_t shift = 0; shift < 16; ++shift) {
            std::vector<float> storage(shift + params.size());
            std::copy(params.begin(), params.end(), storage.begin() + static_cast<std::ptrdiff_t>(shift));
            const std::span<const float> p(storage.data() + shift, params.size());
            Activations acts;
            net.forward(p, x, acts);
            std::vector<float> grads(params.size());
            net.backward(p, acts, g, grads, nullptr);
            if (shift == 0) {
                first_grads = grads;
                first_out = acts.output();
            } else {
                CHECK(acts.output() == first_out);
                CHECK(grads == first_grads);
            }
        }
    }
}
