#include "rfaug/latent_opt.hpp"

#include "rfaug/architectures.hpp"
#include "rfaug/error.hpp"
#include "rfaug/loss.hpp"
#include "rfaug/rng.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace rfaug::latent {

namespace {

constexpr std::size_t inference_chunk = 256;
// Attempts handed to the optimizer at a time during the generation loop.
constexpr std::size_t attempt_chunk = 1024;

nn::Tensor one_hot_targets(const std::vector<int>& labels, std::size_t classes)
{
    nn::Tensor t(labels.size(), {1, 1, classes}, 0.0f);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
            throw ConfigError("label out of range: " + std::to_string(labels[i]) + " with " +
                              std::to_string(classes) + " classes");
        t.sample(i)[static_cast<std::size_t>(labels[i])] = 1.0f;
    }
    return t;
}

void fit_softmax(const nn::Network& net, std::vector<float>& params, const std::vector<SignalSample>& xs,
                 const std::vector<int>& labels, const nn::TrainConfig& cfg)
{
    cfg.validate();
    if (xs.empty() || xs.size() != labels.size())
        throw ConfigError("judge training needs one label per sample and at least one sample");
    const nn::Tensor x = arch::to_tensor(xs);
    const nn::Tensor y = one_hot_targets(labels, net.output_dims().count());
    nn::Optimizer opt(cfg.optimizer, cfg.learning_rate, net.param_count());
    std::vector<float> grads(net.param_count());
    nn::Activations acts;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto order = nn::epoch_order(x.batch(), cfg.seed, epoch);
        double total = 0.0;
        for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
            std::span<const std::size_t> ids(order.data() + b, std::min(order.size(), b + cfg.batch_size) - b);
            net.forward(params, x.rows(ids), acts);
            const auto lg = nn::softmax_cross_entropy(acts.output(), y.rows(ids));
            net.backward(params, acts, lg.grad_prediction, grads, nullptr);
            opt.step(params, grads);
            total += lg.value * static_cast<double>(ids.size());
        }
        if (!std::isfinite(total))
            throw Error("training diverged at epoch " + std::to_string(epoch));
    }
}

std::vector<float> row_of(const nn::Tensor& t, std::size_t i)
{
    auto s = t.sample(i);
    return {s.begin(), s.end()};
}

std::vector<LatentResult> optimize_range(const std::vector<std::vector<float>>& anchors, std::size_t offset,
                                         const gen::AEModel& ae, const Judge& judge, const OptConfig& cfg,
                                         std::uint64_t seed)
{
    const std::size_t L = ae.latent_dim;
    std::vector<LatentResult> out(anchors.size());
    for (std::size_t b = 0; b < anchors.size(); b += cfg.batch_size) {
        const std::size_t e = std::min(anchors.size(), b + cfg.batch_size);
        const std::vector<std::vector<float>> anchor(anchors.begin() + static_cast<std::ptrdiff_t>(b),
                                                     anchors.begin() + static_cast<std::ptrdiff_t>(e));
        std::vector<std::vector<float>> z = anchor;
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (z[i].size() != L)
                throw Error("shape error: anchor of length " + std::to_string(z[i].size()) + ", expected " +
                            std::to_string(L));
            Rng rng = substream(seed, offset + b + i);
            std::normal_distribution<float> nd(0.0f, 1.0f);
            for (auto& v : z[i])
                v += cfg.init_noise_std * nd(rng);
        }
        for (std::size_t step = 0; step <= cfg.inner_steps; ++step) {
            const bool last = step == cfg.inner_steps;
            const auto obj = outlier_objective_batch(z, anchor, ae, judge, cfg.lambda, !last, false);
            for (std::size_t i = 0; i < z.size(); ++i) {
                LatentResult& r = out[b + i];
                if (r.aborted)
                    continue;
                const double v = obj.value[i];
                if (!std::isfinite(v)) {
                    r.aborted = true;
                    continue;
                }
                if (step == 0) {
                    r.initial = r.best = v;
                    r.z = z[i];
                } else if (v < r.best) {
                    r.best = v;
                    r.z = z[i];
                }
                if (!last)
                    for (std::size_t k = 0; k < L; ++k)
                        z[i][k] -= cfg.inner_lr * obj.grad[i][k];
            }
        }
    }
    return out;
}

} // namespace

Judge train_judge(const std::vector<SignalSample>& xs, const std::vector<int>& labels, std::size_t num_authorized,
                  const nn::TrainConfig& cfg)
{
    if (num_authorized < 2)
        throw ConfigError("the judge needs at least two authorized classes");
    for (int l : labels)
        if (l < 0 || static_cast<std::size_t>(l) >= num_authorized)
            throw ConfigError("label out of range: " + std::to_string(l) + " with " +
                              std::to_string(num_authorized) + " authorized classes");
    Judge j;
    j.num_authorized = num_authorized;
    j.net = arch::classifier(num_authorized + 1);
    j.params = j.net.init_params(cfg.seed);
    fit_softmax(j.net, j.params, xs, labels, cfg);
    return j;
}

void retrain_judge(Judge& judge, const std::vector<SignalSample>& xs, const std::vector<int>& labels,
                   const nn::TrainConfig& cfg)
{
    fit_softmax(judge.net, judge.params, xs, labels, cfg);
}

std::vector<std::vector<float>> judge_probabilities(const Judge& judge, const std::vector<SignalSample>& xs)
{
    std::vector<std::vector<float>> out;
    out.reserve(xs.size());
    for (std::size_t b = 0; b < xs.size(); b += inference_chunk) {
        const std::size_t e = std::min(xs.size(), b + inference_chunk);
        const std::vector<SignalSample> part(xs.begin() + static_cast<std::ptrdiff_t>(b),
                                             xs.begin() + static_cast<std::ptrdiff_t>(e));
        const auto p = nn::softmax(judge.net.forward(judge.params, arch::to_tensor(part)));
        for (std::size_t i = 0; i < p.batch(); ++i)
            out.push_back(row_of(p, i));
    }
    return out;
}

std::vector<int> judge_predict(const Judge& judge, const std::vector<SignalSample>& xs)
{
    std::vector<int> out;
    for (const auto& p : judge_probabilities(judge, xs))
        out.push_back(static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()));
    return out;
}

void OptConfig::validate() const
{
    if (inner_steps < 1)
        throw ConfigError("inner_steps must be at least 1");
    if (outer_iters < 1)
        throw ConfigError("outer_iters must be at least 1");
    if (!(inner_lr > 0.0f) || !std::isfinite(inner_lr))
        throw ConfigError("inner_lr must be positive");
    if (!(lambda >= 0.0f) || !std::isfinite(lambda))
        throw ConfigError("lambda must be non-negative");
    if (!(init_noise_std >= 0.0f) || !std::isfinite(init_noise_std))
        throw ConfigError("init_noise_std must be non-negative");
    if (batch_size == 0)
        throw ConfigError("latent batch size must be positive");
    if (retrain_epochs == 0 && outer_iters > 1)
        throw ConfigError("retrain_epochs must be positive when outer_iters > 1");
    judge_train.validate();
}

ObjectiveBatch outlier_objective_batch(const std::vector<std::vector<float>>& z,
                                       const std::vector<std::vector<float>>& anchor, const gen::AEModel& ae,
                                       const Judge& judge, float lambda, bool with_grad, bool strict)
{
    if (ae.conditions() != 0)
        throw ConfigError("latent optimization needs an unconditional decoder");
    if (z.size() != anchor.size())
        throw Error("latent and anchor counts differ");
    const std::size_t batch = z.size();
    const std::size_t L = ae.latent_dim;
    const std::size_t classes = judge.num_authorized + 1;
    const std::size_t target = judge.outlier_class();

    nn::Tensor zt(batch, {1, 1, L});
    for (std::size_t i = 0; i < batch; ++i) {
        if (z[i].size() != L || anchor[i].size() != L)
            throw Error("shape error: latent length differs from " + std::to_string(L));
        std::copy(z[i].begin(), z[i].end(), zt.sample(i).begin());
    }

    thread_local nn::Activations dec_acts, judge_acts;
    ae.decoder.forward(ae.decoder_params, zt, dec_acts);
    judge.net.forward(judge.params, dec_acts.output(), judge_acts);
    const nn::Tensor& logits = judge_acts.output();

    ObjectiveBatch r;
    r.value.resize(batch);
    nn::Tensor g_logits(batch, logits.dims(), 0.0f);
    std::vector<double> dist(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        auto lg = logits.sample(i);
        double mx = -std::numeric_limits<double>::infinity();
        for (float v : lg)
            mx = std::max(mx, static_cast<double>(v));
        double sum = 0.0;
        for (float v : lg)
            sum += std::exp(v - mx);
        const double lse = mx + std::log(sum);
        const double ce = lse - lg[target];
        double d2 = 0.0;
        for (std::size_t k = 0; k < L; ++k) {
            const double d = static_cast<double>(z[i][k]) - anchor[i][k];
            d2 += d * d;
        }
        dist[i] = std::sqrt(d2);
        r.value[i] = dist[i] + lambda * ce;
        if (!std::isfinite(r.value[i])) {
            if (strict)
                throw Error("non-finite objective");
            r.value[i] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        auto g = g_logits.sample(i);
        for (std::size_t k = 0; k < classes; ++k)
            g[k] = static_cast<float>(lambda * (std::exp(lg[k] - lse) - (k == target ? 1.0 : 0.0)));
    }
    if (!with_grad)
        return r;

    nn::Tensor g_x, g_z;
    judge.net.backward(judge.params, judge_acts, g_logits, {}, &g_x);
    ae.decoder.backward(ae.decoder_params, dec_acts, g_x, {}, &g_z);
    r.grad.resize(batch);
    for (std::size_t i = 0; i < batch; ++i) {
        auto& g = r.grad[i];
        g.assign(g_z.sample(i).begin(), g_z.sample(i).end());
        // The norm is not differentiable at z = anchor; 0 is its minimal subgradient.
        if (dist[i] > 0.0)
            for (std::size_t k = 0; k < L; ++k)
                g[k] += static_cast<float>((static_cast<double>(z[i][k]) - anchor[i][k]) / dist[i]);
        for (float v : g)
            if (!std::isfinite(v)) {
                if (strict)
                    throw Error("non-finite objective");
                r.value[i] = std::numeric_limits<double>::quiet_NaN();
                break;
            }
    }
    return r;
}

double outlier_objective(std::span<const float> z, std::span<const float> anchor, const gen::AEModel& ae,
                         const Judge& judge, float lambda)
{
    return outlier_objective_batch({{z.begin(), z.end()}}, {{anchor.begin(), anchor.end()}}, ae, judge, lambda,
                                   false, true)
        .value.front();
}

std::vector<float> outlier_objective_grad(std::span<const float> z, std::span<const float> anchor,
                                          const gen::AEModel& ae, const Judge& judge, float lambda)
{
    return outlier_objective_batch({{z.begin(), z.end()}}, {{anchor.begin(), anchor.end()}}, ae, judge, lambda,
                                   true, true)
        .grad.front();
}

std::vector<LatentResult> optimize_latents(const std::vector<std::vector<float>>& anchors, const gen::AEModel& ae,
                                           const Judge& judge, const OptConfig& cfg, std::uint64_t seed)
{
    cfg.validate();
    return optimize_range(anchors, 0, ae, judge, cfg, seed);
}

LatentResult optimize_latent(const SignalSample& x, const gen::AEModel& ae, const Judge& judge,
                             const OptConfig& cfg)
{
    return optimize_latents({gen::encode(ae, x)}, ae, judge, cfg, derive_seed(cfg.seed, stream::latent)).front();
}

Algorithm1Result run_algorithm1(const std::vector<SignalSample>& xs, const std::vector<int>& labels,
                                 std::size_t num_authorized, const gen::AEModel& ae, const OptConfig& cfg)
{
    cfg.validate();
    return run_algorithm1(xs, labels, train_judge(xs, labels, num_authorized, cfg.judge_train), ae, cfg);
}

Algorithm1Result run_algorithm1(const std::vector<SignalSample>& xs, const std::vector<int>& labels, Judge judge,
                                const gen::AEModel& ae, const OptConfig& cfg)
{
    cfg.validate();
    if (xs.empty() || xs.size() != labels.size())
        throw ConfigError("latent generation needs one label per authorized sample");
    const auto anchors = gen::encode(ae, xs);
    const std::uint64_t base = derive_seed(cfg.seed, stream::latent);

    Algorithm1Result res;
    for (std::size_t it = 0; it < cfg.outer_iters; ++it) {
        const std::uint64_t seed = derive_seed(base, it);
        IterationStats st;
        std::vector<std::vector<float>> winners;
        winners.reserve(cfg.count);
        double sum_initial = 0.0, sum_best = 0.0;
        while (winners.size() < cfg.count) {
            const std::size_t want = std::min(attempt_chunk, cfg.count - winners.size());
            std::vector<std::vector<float>> chunk;
            for (std::size_t a = 0; a < want; ++a)
                chunk.push_back(anchors[(st.attempted + a) % anchors.size()]);
            const auto results = optimize_range(chunk, st.attempted, ae, judge, cfg, seed);
            st.attempted += want;
            for (const auto& r : results) {
                if (r.aborted) {
                    ++st.aborted;
                    continue;
                }
                st.objective_monotone = st.objective_monotone && r.best <= r.initial;
                sum_initial += r.initial;
                sum_best += r.best;
                winners.push_back(r.z);
            }
            if (2 * st.aborted > st.attempted && st.attempted >= std::min(cfg.count, attempt_chunk))
                throw Error("algorithm1 unstable: " + std::to_string(st.aborted) + " of " +
                            std::to_string(st.attempted) + " optimizations aborted in iteration " +
                            std::to_string(it));
        }
        const double kept = static_cast<double>(winners.size());
        st.mean_initial = kept > 0 ? sum_initial / kept : 0.0;
        st.mean_best = kept > 0 ? sum_best / kept : 0.0;

        auto decoded = gen::decode(ae, winners);
        const auto pred = judge_predict(judge, decoded);
        std::size_t hits = 0;
        for (int p : pred)
            hits += static_cast<std::size_t>(p) == judge.outlier_class();
        st.judged_outlier = pred.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(pred.size());
        res.iterations.push_back(st);

        if (it + 1 < cfg.outer_iters) {
            std::vector<SignalSample> train_x = xs;
            std::vector<int> train_y = labels;
            train_x.insert(train_x.end(), decoded.begin(), decoded.end());
            train_y.insert(train_y.end(), decoded.size(), static_cast<int>(judge.outlier_class()));
            auto tc = cfg.judge_train;
            tc.epochs = cfg.retrain_epochs;
            tc.seed = derive_seed(cfg.seed, 0x100 + it);
            retrain_judge(judge, train_x, train_y, tc);
            ++res.retrains;
        }
        if (it + 1 == cfg.outer_iters)
            res.samples = std::move(decoded);
    }
    res.judge = std::move(judge);
    return res;
}

} // namespace rfaug::latent
