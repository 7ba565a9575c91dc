#include "rfaug/openset.hpp"

#include "rfaug/architectures.hpp"
#include "rfaug/error.hpp"
#include "rfaug/loss.hpp"
#include "rfaug/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace rfaug::openset {

namespace {

constexpr std::size_t inference_chunk = 256;

nn::Tensor ova_logits(const OvAModel& m, const std::vector<SignalSample>& xs, std::size_t begin, std::size_t end)
{
    std::vector<SignalSample> chunk(xs.begin() + static_cast<std::ptrdiff_t>(begin),
                                    xs.begin() + static_cast<std::ptrdiff_t>(end));
    return m.net.forward(m.params, arch::to_tensor(chunk));
}

double validation_loss(const nn::Network& net, std::span<const float> params, const nn::Tensor& x,
                       const nn::Tensor& y)
{
    double total = 0.0;
    for (std::size_t b = 0; b < x.batch(); b += inference_chunk) {
        const std::size_t e = std::min(x.batch(), b + inference_chunk);
        const auto lg = nn::sigmoid_bce(net.forward(params, x.slice(b, e)), y.slice(b, e));
        total += lg.value * static_cast<double>(e - b);
    }
    return total / static_cast<double>(x.batch());
}

} // namespace

void SplitSpec::validate() const
{
    if (authorized.size() < 2)
        throw ConfigError("invalid split spec: at least two authorized transmitters are required");
    std::set<std::uint16_t> seen;
    for (const auto* group : {&authorized, &known_outliers, &test_outliers})
        for (auto id : *group)
            if (!seen.insert(id).second)
                throw ConfigError("invalid split spec: transmitter " + std::to_string(id) +
                                  " appears in more than one role");
}

std::uint64_t Split::hash() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    std::uint64_t part = 0;
    for (const auto* set : {&train, &val, &test}) {
        mix(~part++);
        for (const auto& e : *set)
            mix(e.source);
    }
    return h;
}

Split make_split(const Corpus& corpus, const SplitSpec& spec)
{
    spec.validate();
    std::map<std::uint16_t, std::vector<std::size_t>> by_tx;
    for (std::size_t i = 0; i < corpus.samples.size(); ++i)
        by_tx[corpus.samples[i].tx_id].push_back(i);
    for (const auto* group : {&spec.authorized, &spec.known_outliers, &spec.test_outliers})
        for (auto id : *group)
            if (!by_tx.count(id))
                throw ConfigError("invalid split spec: transmitter " + std::to_string(id) + " is not in the corpus");

    Rng rng = substream(spec.seed, stream::split);
    const auto example = [&](std::size_t idx, int label) {
        return Example{corpus.samples[idx].sample, label, corpus.samples[idx].tx_id, idx};
    };

    Split s;
    std::vector<Example> pool;
    for (std::size_t a = 0; a < spec.authorized.size(); ++a) {
        auto idx = by_tx[spec.authorized[a]];
        std::shuffle(idx.begin(), idx.end(), rng);
        const std::size_t keep = idx.size() * 7 / 10;
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < keep ? pool : s.test).push_back(example(idx[i], static_cast<int>(a)));
    }
    for (auto id : spec.known_outliers)
        for (auto i : by_tx[id])
            pool.push_back(example(i, outlier));
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t n_train = pool.size() * 8 / 10;
    s.train.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.assign(pool.begin() + static_cast<std::ptrdiff_t>(n_train), pool.end());
    for (auto id : spec.test_outliers)
        for (auto i : by_tx[id])
            s.test.push_back(example(i, outlier));
    return s;
}

std::vector<float> ova_targets(int label, std::size_t num_authorized)
{
    std::vector<float> t(num_authorized, 0.0f);
    if (label != outlier) {
        if (label < 0 || static_cast<std::size_t>(label) >= num_authorized)
            throw ConfigError("label " + std::to_string(label) + " out of range");
        t[static_cast<std::size_t>(label)] = 1.0f;
    }
    return t;
}

OvAModel train_ova(const std::vector<Example>& train, const std::vector<Example>& val, std::size_t num_authorized,
                   const OvAConfig& cfg, const std::vector<SignalSample>& augmentation)
{
    cfg.train.validate();
    if (train.empty())
        throw ConfigError("OvA training set is empty");
    if (num_authorized < 1)
        throw ConfigError("OvA needs at least one authorized class");
    if (!(cfg.threshold > 0.0f && cfg.threshold < 1.0f))
        throw ConfigError("threshold must be in (0, 1)");

    OvAModel m;
    m.net = arch::classifier(num_authorized);
    m.num_authorized = num_authorized;
    m.threshold = cfg.threshold;
    m.params = m.net.init_params(cfg.train.seed);

    const nn::Dims head_dims{1, 1, num_authorized};
    auto xs = samples_of(train);
    xs.insert(xs.end(), augmentation.begin(), augmentation.end());
    const nn::Tensor x = arch::to_tensor(xs);
    nn::Tensor y(xs.size(), head_dims, 0.0f);
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto t = ova_targets(train[i].label, num_authorized);
        std::copy(t.begin(), t.end(), y.sample(i).begin());
    }

    nn::Tensor vx, vy;
    if (!val.empty()) {
        vx = arch::to_tensor(samples_of(val));
        vy = nn::Tensor(val.size(), head_dims, 0.0f);
        for (std::size_t i = 0; i < val.size(); ++i) {
            const auto t = ova_targets(val[i].label, num_authorized);
            std::copy(t.begin(), t.end(), vy.sample(i).begin());
        }
    }

    nn::Optimizer opt(cfg.train.optimizer, cfg.train.learning_rate, m.net.param_count());
    std::vector<float> grads(m.net.param_count());
    nn::Activations acts;
    std::vector<float> best = m.params;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.train.epochs; ++epoch) {
        const auto order = nn::epoch_order(x.batch(), cfg.train.seed, epoch);
        double total = 0.0;
        for (std::size_t b = 0; b < order.size(); b += cfg.train.batch_size) {
            std::span<const std::size_t> ids(order.data() + b, std::min(order.size(), b + cfg.train.batch_size) - b);
            m.net.forward(m.params, x.rows(ids), acts);
            const auto lg = nn::sigmoid_bce(acts.output(), y.rows(ids));
            m.net.backward(m.params, acts, lg.grad_prediction, grads, nullptr);
            opt.step(m.params, grads);
            total += lg.value * static_cast<double>(ids.size());
        }
        const double train_loss = total / static_cast<double>(x.batch());
        if (!std::isfinite(train_loss))
            throw Error("training diverged at epoch " + std::to_string(epoch));
        m.train_curve.push_back(train_loss);

        const double v = val.empty() ? train_loss : validation_loss(m.net, m.params, vx, vy);
        m.val_curve.push_back(v);
        if (v < best_val) {
            best_val = v;
            best = m.params;
            m.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    m.params = std::move(best);
    return m;
}

int decide(std::span<const float> heads, float threshold)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < heads.size(); ++i)
        if (heads[i] > heads[best])
            best = i;
    if (heads.empty() || heads[best] < threshold)
        return outlier;
    return static_cast<int>(best);
}

std::vector<float> head_outputs(const OvAModel& m, const SignalSample& x)
{
    const auto p = nn::sigmoid(m.net.forward(m.params, arch::to_tensor(x)));
    return {p.values().begin(), p.values().end()};
}

int predict(const OvAModel& m, const SignalSample& x)
{
    return decide(head_outputs(m, x), m.threshold);
}

std::vector<int> predict(const OvAModel& m, const std::vector<SignalSample>& xs)
{
    std::vector<int> out;
    out.reserve(xs.size());
    for (std::size_t b = 0; b < xs.size(); b += inference_chunk) {
        const std::size_t e = std::min(xs.size(), b + inference_chunk);
        const auto p = nn::sigmoid(ova_logits(m, xs, b, e));
        for (std::size_t i = 0; i < p.batch(); ++i)
            out.push_back(decide(p.sample(i), m.threshold));
    }
    return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth)
{
    if (truth.empty())
        throw Error("cannot evaluate on an empty test set");
    if (predicted.size() != truth.size())
        throw Error("prediction and label counts differ");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double evaluate(const OvAModel& m, const std::vector<Example>& test)
{
    if (test.empty())
        throw Error("cannot evaluate on an empty test set");
    const auto pred = predict(m, samples_of(test));
    const auto truth = labels_of(test);
    return accuracy(pred, truth);
}

std::vector<SignalSample> samples_of(const std::vector<Example>& xs)
{
    std::vector<SignalSample> out;
    out.reserve(xs.size());
    for (const auto& e : xs)
        out.push_back(e.sample);
    return out;
}

std::vector<int> labels_of(const std::vector<Example>& xs)
{
    std::vector<int> out;
    out.reserve(xs.size());
    for (const auto& e : xs)
        out.push_back(e.label);
    return out;
}

} // namespace rfaug::openset
