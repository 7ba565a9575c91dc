#include "rfaug/architectures.hpp"
#include "rfaug/error.hpp"
#include "rfaug/fingerprint_sim.hpp"
#include "rfaug/loss.hpp"
#include "rfaug/openset.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace rfaug;
using namespace rfaug::openset;

namespace {

// Corpus whose sample i carries tx id from `counts` and a payload that
// identifies the sample, so splits can be traced back.
Corpus counted_corpus(const std::map<std::uint16_t, std::size_t>& counts)
{
    Corpus c;
    std::size_t serial = 0;
    for (const auto& [id, n] : counts)
        for (std::size_t k = 0; k < n; ++k) {
            LabeledSample s;
            s.tx_id = id;
            s.sample.iq.fill(0.0f);
            s.sample.iq[0] = static_cast<float>(serial++);
            c.samples.push_back(s);
        }
    return c;
}

std::size_t count_tx(const std::vector<Example>& xs, std::uint16_t id)
{
    std::size_t n = 0;
    for (const auto& e : xs)
        n += e.tx_id == id;
    return n;
}

} // namespace

TEST_CASE("split sizes follow the 70/30 and 80/20 rules")
{
    const auto corpus = counted_corpus({{0, 100}, {1, 137}, {2, 251}, {3, 90}, {4, 77}, {5, 64}});
    const SplitSpec spec{{0, 1, 2}, {3, 4}, {5}, 11};
    const auto s = make_split(corpus, spec);

    const std::size_t pool = 70 + 137 * 7 / 10 + 251 * 7 / 10 + 90 + 77;
    CHECK(s.train.size() == pool * 8 / 10);
    CHECK(s.val.size() == pool - pool * 8 / 10);
    CHECK(s.test.size() == 30 + (137 - 137 * 7 / 10) + (251 - 251 * 7 / 10) + 64);

    CHECK(count_tx(s.test, 0) == 30);
    CHECK(count_tx(s.train, 0) + count_tx(s.val, 0) == 70);
    for (auto [k, n] : {std::pair<std::uint16_t, std::size_t>{3, 90}, {4, 77}}) {
        CHECK(count_tx(s.test, k) == 0);
        CHECK(count_tx(s.train, k) + count_tx(s.val, k) == n);
    }
    CHECK(count_tx(s.test, 5) == 64);

    std::set<std::size_t> seen;
    for (const auto* part : {&s.train, &s.val, &s.test})
        for (const auto& e : *part) {
            CHECK(seen.insert(e.source).second);
            CHECK(e.sample.iq[0] == static_cast<float>(e.source));
            if (e.tx_id <= 2)
                CHECK(e.label == static_cast<int>(e.tx_id));
            else
                CHECK(e.label == outlier);
        }
    CHECK(seen.size() == corpus.samples.size());
}

TEST_CASE("pool of 1000 splits into 800 train and 200 validation")
{
    const auto small = make_split(counted_corpus({{1, 500}, {2, 500}, {3, 300}}), {{1, 2}, {}, {3}, 3});
    CHECK(small.train.size() == 560);
    CHECK(small.val.size() == 140);

    const auto exact = make_split(counted_corpus({{1, 10}, {2, 10}, {3, 986}}), {{1, 2}, {3}, {}, 5});
    CHECK(exact.train.size() + exact.val.size() == 1000);
    CHECK(exact.train.size() == 800);
    CHECK(exact.val.size() == 200);
}

TEST_CASE("split is seeded and deterministic")
{
    const auto corpus = counted_corpus({{0, 120}, {1, 120}, {2, 50}, {3, 50}});
    const SplitSpec spec{{0, 1}, {2}, {3}, 9};
    CHECK(make_split(corpus, spec).hash() == make_split(corpus, spec).hash());
    auto other = spec;
    other.seed = 10;
    CHECK(make_split(corpus, other).hash() != make_split(corpus, spec).hash());
}

TEST_CASE("invalid split specs are rejected")
{
    const auto corpus = counted_corpus({{0, 20}, {1, 20}, {2, 20}});
    CHECK_THROWS_WITH_AS(make_split(corpus, {{0, 1}, {1}, {}, 0}), doctest::Contains("invalid split spec"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(make_split(corpus, {{0, 1}, {}, {0}, 0}), doctest::Contains("invalid split spec"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(make_split(corpus, {{0, 1}, {}, {42}, 0}), doctest::Contains("invalid split spec"),
                         ConfigError);
    CHECK_THROWS_AS(make_split(corpus, {{0}, {}, {}, 0}), ConfigError);
}

TEST_CASE("ova label scheme")
{
    CHECK(ova_targets(2, 4) == std::vector<float>{0, 0, 1, 0});
    CHECK(ova_targets(outlier, 4) == std::vector<float>{0, 0, 0, 0});
    CHECK_THROWS_AS(ova_targets(4, 4), ConfigError);
}

TEST_CASE("decision rule")
{
    CHECK(decide(std::vector<float>{0.1f, 0.2f, 0.1f}, 0.5f) == outlier);
    CHECK(decide(std::vector<float>{0.9f, 0.2f, 0.1f}, 0.5f) == 0);
    CHECK(decide(std::vector<float>{0.7f, 0.7f}, 0.5f) == 0);
    CHECK(decide(std::vector<float>{0.2f, 0.5f}, 0.5f) == 1);
}

TEST_CASE("accuracy over the full open-set decision")
{
    const std::vector<int> truth{0, 1, 2, outlier};
    CHECK(accuracy(truth, truth) == 1.0);

    std::vector<int> labels(70, 1);
    labels.insert(labels.end(), 30, outlier);
    const std::vector<int> always_outlier(labels.size(), outlier);
    CHECK(accuracy(always_outlier, labels) == doctest::Approx(0.3));

    CHECK_THROWS_WITH_AS(accuracy(std::vector<int>{}, std::vector<int>{}), doctest::Contains("empty test set"),
                         Error);
}

TEST_CASE("feature extractor size")
{
    CHECK(arch::classifier(1).param_count() == 540160 + 129);
}

namespace {

struct SimData {
    Corpus corpus;
    Split split;
};

const SimData& separability_data()
{
    static const SimData d = [] {
        SimData out;
        const auto profiles = sim::synth_population(10, 21);
        sim::CorpusConfig cfg;
        cfg.seed = 21;
        cfg.channel.snr_db = 25.0;
        out.corpus = sim::generate_corpus(profiles, cfg);
        SplitSpec spec;
        for (std::uint16_t i = 0; i < 10; ++i)
            spec.authorized.push_back(i);
        spec.seed = 21;
        out.split = make_split(out.corpus, spec);
        return out;
    }();
    return d;
}

} // namespace

TEST_CASE("simulated fingerprints are separable in closed set")
{
    const auto& d = separability_data();
    const auto net = arch::classifier(10);
    const auto x = arch::to_tensor(samples_of(d.split.train));
    nn::Tensor y(x.batch(), {1, 1, 10}, 0.0f);
    for (std::size_t i = 0; i < d.split.train.size(); ++i)
        y.sample(i)[static_cast<std::size_t>(d.split.train[i].label)] = 1.0f;

    auto params = net.init_params(21);
    nn::Optimizer opt(nn::OptimizerKind::adam_like, 1e-3f, net.param_count());
    std::vector<float> grads(net.param_count());
    nn::Activations acts;
    for (std::size_t epoch = 0; epoch < 15; ++epoch) {
        const auto order = nn::epoch_order(x.batch(), 21, epoch);
        for (std::size_t b = 0; b < order.size(); b += 64) {
            std::span<const std::size_t> ids(order.data() + b, std::min<std::size_t>(64, order.size() - b));
            net.forward(params, x.rows(ids), acts);
            const auto lg = nn::softmax_cross_entropy(acts.output(), y.rows(ids));
            net.backward(params, acts, lg.grad_prediction, grads, nullptr);
            opt.step(params, grads);
        }
    }

    const auto tx = arch::to_tensor(samples_of(d.split.test));
    const auto p = nn::softmax(net.forward(params, tx));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < p.batch(); ++i) {
        const auto row = p.sample(i);
        const auto arg = std::max_element(row.begin(), row.end()) - row.begin();
        hits += arg == d.split.test[i].label;
    }
    const double acc = static_cast<double>(hits) / static_cast<double>(p.batch());
    MESSAGE("closed-set accuracy " << acc);
    CHECK(acc > 0.8);
}

TEST_CASE("ova training is deterministic and empty augmentation is a no-op")
{
    const auto& d = separability_data();
    std::vector<Example> train(d.split.train.begin(), d.split.train.begin() + 200);
    std::vector<Example> val(d.split.val.begin(), d.split.val.begin() + 50);
    for (auto* part : {&train, &val})
        for (auto& e : *part)
            if (e.label >= 3)
                e.label = outlier;
    OvAConfig cfg;
    cfg.train.epochs = 2;
    cfg.train.seed = 4;
    const auto a = train_ova(train, val, 3, cfg);
    const auto b = train_ova(train, val, 3, cfg, {});
    CHECK(a.params == b.params);
    CHECK(a.val_curve == b.val_curve);
    CHECK(a.best_epoch < 2);

    const auto xs = samples_of(val);
    const auto batch = predict(a, xs);
    CHECK(predict(a, xs) == batch);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(predict(a, xs[i]) == predict(a, xs[i]));
        CHECK(head_outputs(a, xs[i]) == head_outputs(a, xs[i]));
    }
    CHECK(evaluate(a, val) == doctest::Approx(accuracy(batch, labels_of(val))));
    CHECK_THROWS_AS(train_ova({}, val, 3, cfg), ConfigError);
    CHECK_THROWS_WITH_AS(evaluate(a, {}), doctest::Contains("empty test set"), Error);
}
