#include "gradcheck.hpp"
#include "objective_instance.hpp"
#include "rfaug/error.hpp"
#include "rfaug/fingerprint_sim.hpp"
#include "rfaug/generative.hpp"
#include "rfaug/latent_opt.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rfaug;
using namespace rfaug::latent;

namespace {

struct Fixture {
    std::vector<SignalSample> xs;
    std::vector<int> labels;
    gen::AEModel ae;
    Judge judge;
};

nn::TrainConfig judge_cfg(std::size_t epochs, std::uint64_t seed)
{
    return {1e-3f, 32, epochs, seed, nn::OptimizerKind::adam_like};
}

const Fixture& fixture()
{
    static const Fixture f = [] {
        sim::CorpusConfig cfg;
        cfg.seed = 4;
        cfg.packets_min = 30;
        cfg.packets_max = 40;
        const auto corpus = sim::generate_corpus(sim::synth_population(5, 4), cfg);
        Fixture out;
        for (const auto& s : corpus.samples) {
            out.xs.push_back(s.sample);
            out.labels.push_back(static_cast<int>(s.tx_id));
        }
        gen::GenConfig g;
        g.train.epochs = 3;
        g.train.seed = 2;
        out.ae = gen::train_autoencoder(out.xs, g);
        out.judge = train_judge(out.xs, out.labels, 5, judge_cfg(2, 3));
        return out;
    }();
    return f;
}

// A judge whose logits ignore the input and put all mass on the outlier class.
Judge confident_outlier_judge(double margin)
{
    Judge j = fixture().judge;
    const std::size_t classes = j.num_authorized + 1;
    const std::size_t last_w = 128 * classes;
    auto tail = std::span<float>(j.params).last(last_w + classes);
    std::fill(tail.begin(), tail.end(), 0.0f);
    tail[last_w + j.outlier_class()] = static_cast<float>(margin);
    return j;
}

double norm(const std::vector<float>& v)
{
    double s = 0.0;
    for (float x : v)
        s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

OptConfig small_opt()
{
    OptConfig c;
    c.inner_steps = 5;
    c.inner_lr = 0.05f;
    c.outer_iters = 1;
    c.count = 20;
    c.batch_size = 8;
    c.retrain_epochs = 1;
    c.judge_train = judge_cfg(1, 1);
    c.seed = 3;
    return c;
}

} // namespace

TEST_CASE("judge has one output per authorized class plus the outlier class")
{
    const auto& f = fixture();
    CHECK(f.judge.net.output_dims().count() == 6);
    const auto p = judge_probabilities(f.judge, {f.xs[0], f.xs[1]});
    REQUIRE(p.size() == 2);
    CHECK(p[0].size() == 6);
    double total = 0.0;
    for (float v : p[0])
        total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-5));
    const auto again = train_judge(f.xs, f.labels, 5, judge_cfg(2, 3));
    CHECK(again.params == f.judge.params);
    CHECK_THROWS_AS(train_judge(f.xs, std::vector<int>(f.xs.size(), 0), 1, judge_cfg(1, 1)), ConfigError);
}

TEST_CASE("objective gradient matches finite differences on small random networks")
{
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        const auto inst = testing::small_objective_instance(100 + trial, 1e-3);
        auto z = inst.z;
        const float lambda = trial % 2 ? 1.0f : 0.3f;
        const auto analytic = outlier_objective_grad(z, inst.anchor, inst.ae, inst.judge, lambda);
        const auto numeric = testing::numeric_gradient(
            z, [&] { return outlier_objective(z, inst.anchor, inst.ae, inst.judge, lambda); }, 1e-3);
        CHECK(testing::relative_error(analytic, numeric) < 1e-3);
    }
}

// The full-size networks evaluate in float32; central differences bottom out
// near 1e-3 relative error there, so this is a coarser sanity check.
TEST_CASE("objective gradient agrees with finite differences through the full networks")
{
    const auto& f = fixture();
    std::mt19937_64 rng(78);
    std::normal_distribution<float> nd;
    for (int trial = 0; trial < 3; ++trial) {
        const auto anchor = gen::encode(f.ae, f.xs[static_cast<std::size_t>(trial) * 7]);
        std::vector<float> z = anchor;
        for (auto& v : z)
            v += 0.3f * nd(rng);
        const auto analytic = outlier_objective_grad(z, anchor, f.ae, f.judge, 1.0f);
        const auto numeric = testing::numeric_gradient(
            z, [&] { return outlier_objective(z, anchor, f.ae, f.judge, 1.0f); }, 1e-3);
        CHECK(testing::relative_error(analytic, numeric) < 1e-2);
    }
}

TEST_CASE("objective vanishes at the anchor under a perfect judge")
{
    const auto& f = fixture();
    const auto judge = confident_outlier_judge(60.0);
    const auto anchor = gen::encode(f.ae, f.xs[0]);
    CHECK(outlier_objective(anchor, anchor, f.ae, judge, 1.0f) <= 1e-6);
    CHECK(outlier_objective(anchor, anchor, f.ae, f.judge, 0.0f) == 0.0);
}

TEST_CASE("lambda zero without noise keeps the anchor")
{
    const auto& f = fixture();
    auto cfg = small_opt();
    cfg.lambda = 0.0f;
    cfg.init_noise_std = 0.0f;
    cfg.inner_steps = 10;
    const auto r = optimize_latent(f.xs[3], f.ae, f.judge, cfg);
    CHECK(r.z == gen::encode(f.ae, f.xs[3]));
    CHECK(r.best == 0.0);
}

TEST_CASE("best iterate never exceeds the initial objective")
{
    const auto& f = fixture();
    auto cfg = small_opt();
    cfg.inner_steps = 8;
    cfg.inner_lr = 0.2f;
    std::vector<std::vector<float>> anchors;
    for (std::size_t i = 0; i < 100; ++i)
        anchors.push_back(gen::encode(f.ae, f.xs[(i * 37) % f.xs.size()]));
    const auto results = optimize_latents(anchors, f.ae, f.judge, cfg, 11);
    REQUIRE(results.size() == 100);
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK_FALSE(results[i].aborted);
        CHECK(results[i].best <= results[i].initial);
        CHECK(outlier_objective(results[i].z, anchors[i], f.ae, f.judge, cfg.lambda) ==
              doctest::Approx(results[i].best).epsilon(1e-5));
    }
}

TEST_CASE("a satisfied judge barely moves the latent")
{
    const auto& f = fixture();
    const auto judge = confident_outlier_judge(8.0);
    auto cfg = small_opt();
    cfg.init_noise_std = 0.0f;
    cfg.inner_steps = 20;
    const auto anchor = gen::encode(f.ae, f.xs[9]);
    const auto probs = judge_probabilities(judge, {f.xs[9]}).front();
    REQUIRE(probs[judge.outlier_class()] >= 0.99f);
    const double eps = norm(outlier_objective_grad(anchor, anchor, f.ae, judge, cfg.lambda));
    const auto r = optimize_latents({anchor}, f.ae, judge, cfg, 1).front();
    std::vector<float> moved(anchor.size());
    for (std::size_t k = 0; k < anchor.size(); ++k)
        moved[k] = r.z[k] - anchor[k];
    CHECK(norm(moved) <= cfg.inner_lr * static_cast<double>(cfg.inner_steps) * eps * 1.01 + 1e-9);
}

TEST_CASE("judge retraining loop structure")
{
    const auto& f = fixture();
    auto cfg = small_opt();
    const auto one = run_algorithm1(f.xs, f.labels, f.judge, f.ae, cfg);
    CHECK(one.retrains == 0);
    CHECK(one.samples.size() == 20);
    CHECK(one.judge.params == f.judge.params);
    REQUIRE(one.iterations.size() == 1);
    CHECK(one.iterations[0].objective_monotone);

    cfg.outer_iters = 2;
    cfg.count = 13;
    const auto two = run_algorithm1(f.xs, f.labels, f.judge, f.ae, cfg);
    CHECK(two.retrains == 1);
    CHECK(two.samples.size() == 13);
    CHECK(two.judge.params != f.judge.params);
    CHECK(two.iterations.size() == 2);
    for (const auto& s : two.samples)
        CHECK(std::all_of(s.iq.begin(), s.iq.end(), [](float v) { return std::isfinite(v); }));

    const auto again = run_algorithm1(f.xs, f.labels, f.judge, f.ae, cfg);
    CHECK(again.samples[12].iq == two.samples[12].iq);
}

TEST_CASE("a broken judge makes the generation loop unstable")
{
    const auto& f = fixture();
    Judge broken = f.judge;
    std::fill(broken.params.begin(), broken.params.end(), std::numeric_limits<float>::quiet_NaN());
    CHECK_THROWS_WITH_AS(run_algorithm1(f.xs, f.labels, broken, f.ae, small_opt()),
                         doctest::Contains("algorithm1 unstable"), Error);
    const auto anchor = gen::encode(f.ae, f.xs[0]);
    CHECK_THROWS_WITH_AS(outlier_objective(anchor, anchor, f.ae, broken, 1.0f), doctest::Contains("non-finite"),
                         Error);
}

TEST_CASE("optimizer config validation")
{
    auto c = small_opt();
    c.inner_steps = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_opt();
    c.outer_iters = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small_opt();
    c.lambda = -1.0f;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
