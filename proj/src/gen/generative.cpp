#include "rfaug/generative.hpp"

#include "rfaug/architectures.hpp"
#include "rfaug/error.hpp"
#include "rfaug/loss.hpp"
#include "rfaug/model_io.hpp"
#include "rfaug/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>

namespace rfaug::gen {

namespace {

constexpr std::size_t chunk = 256;

bool is_variational(ModelKind k)
{
    return k != ModelKind::ae;
}

GenerativeModel make_model(ModelKind kind, std::size_t latent_dim, std::size_t num_classes)
{
    GenerativeModel m;
    m.kind = kind;
    m.latent_dim = latent_dim;
    m.num_classes = kind == ModelKind::cvae ? num_classes : 0;
    const std::size_t c = m.conditions();
    m.trunk = arch::encoder_trunk();
    m.head = arch::encoder_head(c, is_variational(kind) ? 2 * latent_dim : latent_dim);
    m.decoder = arch::decoder(latent_dim, c);
    return m;
}

// Row-wise [a | b] for flat (batch, 1, 1, n) tensors; b may be empty.
nn::Tensor concat(const nn::Tensor& a, const nn::Tensor& b)
{
    if (b.size() == 0)
        return a;
    const std::size_t na = a.sample_size(), nb = b.sample_size();
    nn::Tensor out(a.batch(), {1, 1, na + nb});
    for (std::size_t i = 0; i < a.batch(); ++i) {
        auto dst = out.sample(i);
        std::copy(a.sample(i).begin(), a.sample(i).end(), dst.begin());
        std::copy(b.sample(i).begin(), b.sample(i).end(), dst.begin() + static_cast<std::ptrdiff_t>(na));
    }
    return out;
}

// Columns [begin, begin + width) of a flat tensor.
nn::Tensor columns(const nn::Tensor& t, std::size_t begin, std::size_t width)
{
    nn::Tensor out(t.batch(), {1, 1, width});
    for (std::size_t i = 0; i < t.batch(); ++i) {
        auto src = t.sample(i).subspan(begin, width);
        std::copy(src.begin(), src.end(), out.sample(i).begin());
    }
    return out;
}

nn::Tensor one_hot(const std::vector<int>& labels, std::size_t num_classes)
{
    if (num_classes == 0)
        return {};
    nn::Tensor t(labels.size(), {1, 1, num_classes}, 0.0f);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes)
            throw ConfigError("label out of range: " + std::to_string(labels[i]) + " with " +
                              std::to_string(num_classes) + " classes");
        t.sample(i)[static_cast<std::size_t>(labels[i])] = 1.0f;
    }
    return t;
}

nn::Tensor normal_tensor(std::size_t batch, std::size_t width, Rng& rng)
{
    std::normal_distribution<float> nd;
    nn::Tensor t(batch, {1, 1, width});
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = nd(rng);
    return t;
}

struct Grads {
    std::vector<float> trunk, head, decoder;
};

// One forward pass over a batch, and the backward pass when `grads` is set.
EpochLoss pass(const GenerativeModel& m, const nn::Tensor& x, const nn::Tensor& cond, const nn::Tensor& eta,
               float beta, Grads* grads)
{
    const std::size_t batch = x.batch();
    const std::size_t L = m.latent_dim;
    const bool variational = is_variational(m.kind);

    nn::Activations ta, ha, da;
    m.trunk.forward(m.trunk_params, x, ta);
    m.head.forward(m.head_params, concat(ta.output(), cond), ha);
    const nn::Tensor& out = ha.output();

    nn::Tensor z, mu, logvar;
    if (variational) {
        mu = columns(out, 0, L);
        logvar = columns(out, L, L);
        z = nn::Tensor(batch, {1, 1, L});
        for (std::size_t i = 0; i < z.size(); ++i)
            z[i] = mu[i] + std::exp(0.5f * logvar[i]) * eta[i];
    } else {
        z = out;
    }
    m.decoder.forward(m.decoder_params, concat(z, cond), da);
    const nn::Tensor& x_hat = da.output();

    EpochLoss loss;
    double sq = 0.0;
    nn::Tensor d_xhat(batch, x.dims());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = static_cast<double>(x_hat[i]) - x[i];
        sq += d * d;
        d_xhat[i] = static_cast<float>(2.0 * d / static_cast<double>(batch));
    }
    loss.reconstruction = sq / static_cast<double>(batch);
    nn::LossGrad kl;
    if (variational) {
        kl = nn::loss_grad(nn::LossKind::gaussian_kl, mu, logvar);
        loss.kl = kl.value;
    }
    loss.total = loss.reconstruction + beta * loss.kl;
    if (!grads)
        return loss;

    nn::Tensor d_zin, d_h;
    m.decoder.backward(m.decoder_params, da, d_xhat, grads->decoder, &d_zin);
    nn::Tensor d_out(batch, out.dims());
    for (std::size_t i = 0; i < batch; ++i) {
        auto dz = d_zin.sample(i);
        auto dst = d_out.sample(i);
        for (std::size_t k = 0; k < L; ++k) {
            if (!variational) {
                dst[k] = dz[k];
                continue;
            }
            const std::size_t j = i * L + k;
            const float sigma = std::exp(0.5f * logvar[j]);
            dst[k] = dz[k] + beta * kl.grad_prediction[j];
            dst[L + k] = dz[k] * eta[j] * 0.5f * sigma + beta * kl.grad_target[j];
        }
    }
    m.head.backward(m.head_params, ha, d_out, grads->head, &d_h);
    m.trunk.backward(m.trunk_params, ta, columns(d_h, 0, arch::encoder_trunk_width), grads->trunk, nullptr);
    return loss;
}

GenerativeModel fit(GenerativeModel m, const std::vector<SignalSample>& samples, const std::vector<int>& labels,
                    const GenConfig& cfg)
{
    const auto& tc = cfg.train;
    m.trunk_params = m.trunk.init_params(derive_seed(tc.seed, 1));
    m.head_params = m.head.init_params(derive_seed(tc.seed, 2));
    m.decoder_params = m.decoder.init_params(derive_seed(tc.seed, 3));

    const nn::Tensor x = arch::to_tensor(samples);
    const nn::Tensor cond = one_hot(labels, m.conditions());
    const float beta = is_variational(m.kind) ? cfg.beta : 0.0f;

    nn::Optimizer o_trunk(tc.optimizer, tc.learning_rate, m.trunk.param_count());
    nn::Optimizer o_head(tc.optimizer, tc.learning_rate, m.head.param_count());
    nn::Optimizer o_dec(tc.optimizer, tc.learning_rate, m.decoder.param_count());
    Grads g{std::vector<float>(m.trunk.param_count()), std::vector<float>(m.head.param_count()),
            std::vector<float>(m.decoder.param_count())};

    for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
        const auto order = nn::epoch_order(x.batch(), tc.seed, epoch);
        Rng eta_rng = substream(derive_seed(tc.seed, stream::reparam), epoch);
        EpochLoss sum;
        for (std::size_t b = 0; b < order.size(); b += tc.batch_size) {
            std::span<const std::size_t> ids(order.data() + b, std::min(order.size(), b + tc.batch_size) - b);
            const nn::Tensor eta = is_variational(m.kind) ? normal_tensor(ids.size(), m.latent_dim, eta_rng)
                                                          : nn::Tensor{};
            const auto l = pass(m, x.rows(ids), cond.size() ? cond.rows(ids) : nn::Tensor{}, eta, beta, &g);
            o_trunk.step(m.trunk_params, g.trunk);
            o_head.step(m.head_params, g.head);
            o_dec.step(m.decoder_params, g.decoder);
            const double w = static_cast<double>(ids.size());
            sum.reconstruction += l.reconstruction * w;
            sum.kl += l.kl * w;
            sum.total += l.total * w;
        }
        const double n = static_cast<double>(x.batch());
        EpochLoss mean{sum.reconstruction / n, sum.kl / n, sum.total / n};
        if (!std::isfinite(mean.total))
            throw Error("training diverged at epoch " + std::to_string(epoch));
        m.loss_curve.push_back(mean);
    }
    return m;
}

void check_count(const std::vector<SignalSample>& samples, std::size_t minimum, const char* what)
{
    if (samples.size() < minimum)
        throw ConfigError(std::string(what) + " needs at least " + std::to_string(minimum) + " samples, got " +
                          std::to_string(samples.size()));
}

std::vector<float> row(const nn::Tensor& t, std::size_t i)
{
    auto s = t.sample(i);
    return {s.begin(), s.end()};
}

} // namespace

std::string to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::vae:
        return "vae";
    case ModelKind::cvae:
        return "cvae";
    case ModelKind::ae:
        return "ae";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s)
{
    if (s == "vae")
        return ModelKind::vae;
    if (s == "cvae")
        return ModelKind::cvae;
    if (s == "ae")
        return ModelKind::ae;
    throw ConfigError("unknown model kind '" + s + "'");
}

void GenConfig::validate() const
{
    train.validate();
    if (latent_dim == 0)
        throw ConfigError("latent_dim must be positive");
    if (!(beta >= 0.0f) || !std::isfinite(beta))
        throw ConfigError("beta must be a non-negative number");
}

VAEModel train_vae(const std::vector<SignalSample>& samples, const GenConfig& cfg)
{
    cfg.validate();
    check_count(samples, 50, "VAE training");
    return fit(make_model(ModelKind::vae, cfg.latent_dim, 0), samples, {}, cfg);
}

CVAEModel train_cvae(const std::vector<SignalSample>& samples, const std::vector<int>& labels,
                     std::size_t num_classes, const GenConfig& cfg)
{
    cfg.validate();
    if (num_classes == 0)
        throw ConfigError("CVAE needs at least one class");
    if (labels.size() != samples.size())
        throw ConfigError("CVAE needs one label per sample");
    std::vector<std::size_t> per_class(num_classes, 0);
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= num_classes)
            throw ConfigError("label out of range: " + std::to_string(l) + " with " + std::to_string(num_classes) +
                              " classes");
        ++per_class[static_cast<std::size_t>(l)];
    }
    for (std::size_t c = 0; c < num_classes; ++c)
        if (per_class[c] < 10)
            throw ConfigError("CVAE class " + std::to_string(c) + " has " + std::to_string(per_class[c]) +
                              " samples, needs at least 10");
    return fit(make_model(ModelKind::cvae, cfg.latent_dim, num_classes), samples, labels, cfg);
}

AEModel train_autoencoder(const std::vector<SignalSample>& samples, const GenConfig& cfg)
{
    cfg.validate();
    check_count(samples, 1, "autoencoder training");
    return fit(make_model(ModelKind::ae, cfg.latent_dim, 0), samples, {}, cfg);
}

EpochLoss evaluate_loss(const GenerativeModel& m, const std::vector<SignalSample>& samples,
                        const std::vector<int>& labels, float beta, std::uint64_t seed)
{
    if (samples.empty())
        throw Error("cannot evaluate a model on zero samples");
    Rng rng = substream(seed, stream::reparam);
    EpochLoss sum;
    for (std::size_t b = 0; b < samples.size(); b += chunk) {
        const std::size_t e = std::min(samples.size(), b + chunk);
        const std::vector<SignalSample> xs(samples.begin() + static_cast<std::ptrdiff_t>(b),
                                           samples.begin() + static_cast<std::ptrdiff_t>(e));
        const std::vector<int> ls = m.conditions() ? std::vector<int>(labels.begin() + static_cast<std::ptrdiff_t>(b),
                                                                      labels.begin() + static_cast<std::ptrdiff_t>(e))
                                                   : std::vector<int>{};
        const nn::Tensor eta = is_variational(m.kind) ? normal_tensor(e - b, m.latent_dim, rng) : nn::Tensor{};
        const auto l = pass(m, arch::to_tensor(xs), one_hot(ls, m.conditions()), eta,
                            is_variational(m.kind) ? beta : 0.0f, nullptr);
        const double w = static_cast<double>(e - b);
        sum.reconstruction += l.reconstruction * w;
        sum.kl += l.kl * w;
        sum.total += l.total * w;
    }
    const double n = static_cast<double>(samples.size());
    return {sum.reconstruction / n, sum.kl / n, sum.total / n};
}

std::vector<std::vector<float>> encode(const GenerativeModel& m, const std::vector<SignalSample>& xs,
                                       const std::vector<int>& labels)
{
    if (m.conditions() && labels.size() != xs.size())
        throw ConfigError("CVAE encoding needs one label per sample");
    std::vector<std::vector<float>> out;
    out.reserve(xs.size());
    for (std::size_t b = 0; b < xs.size(); b += chunk) {
        const std::size_t e = std::min(xs.size(), b + chunk);
        const std::vector<SignalSample> part(xs.begin() + static_cast<std::ptrdiff_t>(b),
                                             xs.begin() + static_cast<std::ptrdiff_t>(e));
        const std::vector<int> ls = m.conditions() ? std::vector<int>(labels.begin() + static_cast<std::ptrdiff_t>(b),
                                                                      labels.begin() + static_cast<std::ptrdiff_t>(e))
                                                   : std::vector<int>{};
        const auto h = m.trunk.forward(m.trunk_params, arch::to_tensor(part));
        const auto head = m.head.forward(m.head_params, concat(h, one_hot(ls, m.conditions())));
        for (std::size_t i = 0; i < head.batch(); ++i) {
            auto r = row(head, i);
            r.resize(m.latent_dim); // mu for a VAE
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<float> encode(const GenerativeModel& m, const SignalSample& x, int label)
{
    return encode(m, std::vector<SignalSample>{x}, std::vector<int>{label}).front();
}

std::vector<SignalSample> decode(const GenerativeModel& m, const std::vector<std::vector<float>>& zs,
                                 const std::vector<int>& labels)
{
    if (m.conditions() && labels.size() != zs.size())
        throw ConfigError("CVAE decoding needs one label per latent");
    std::vector<SignalSample> out;
    out.reserve(zs.size());
    for (std::size_t b = 0; b < zs.size(); b += chunk) {
        const std::size_t e = std::min(zs.size(), b + chunk);
        nn::Tensor z(e - b, {1, 1, m.latent_dim});
        for (std::size_t i = b; i < e; ++i) {
            if (zs[i].size() != m.latent_dim)
                throw Error("shape error: latent of length " + std::to_string(zs[i].size()) + ", expected " +
                            std::to_string(m.latent_dim));
            std::copy(zs[i].begin(), zs[i].end(), z.sample(i - b).begin());
        }
        const std::vector<int> ls = m.conditions() ? std::vector<int>(labels.begin() + static_cast<std::ptrdiff_t>(b),
                                                                      labels.begin() + static_cast<std::ptrdiff_t>(e))
                                                   : std::vector<int>{};
        const auto x = m.decoder.forward(m.decoder_params, concat(z, one_hot(ls, m.conditions())));
        for (auto& s : arch::from_tensor(x))
            out.push_back(s);
    }
    return out;
}

SignalSample decode(const GenerativeModel& m, std::span<const float> z, int label)
{
    return decode(m, {std::vector<float>(z.begin(), z.end())}, std::vector<int>{label}).front();
}

namespace {

std::vector<std::vector<float>> standard_normal_latents(std::size_t count, std::size_t dim, std::uint64_t seed)
{
    const std::uint64_t base = derive_seed(seed, stream::sample);
    std::vector<std::vector<float>> zs(count, std::vector<float>(dim));
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = substream(base, i);
        std::normal_distribution<float> nd;
        for (auto& v : zs[i])
            v = nd(rng);
    }
    return zs;
}

} // namespace

std::vector<SignalSample> sample_vae(const VAEModel& m, std::size_t count, std::uint64_t seed)
{
    if (m.kind != ModelKind::vae)
        throw ConfigError("sample_vae needs a VAE model, got " + to_string(m.kind));
    return decode(m, standard_normal_latents(count, m.latent_dim, seed));
}

std::vector<std::size_t> class_counts(std::size_t total, std::size_t num_classes)
{
    if (num_classes == 0)
        throw ConfigError("class_counts needs at least one class");
    std::vector<std::size_t> counts(num_classes, total / num_classes);
    for (std::size_t c = 0; c < total % num_classes; ++c)
        ++counts[c];
    return counts;
}

LabeledGeneration sample_cvae(const CVAEModel& m, std::size_t total, std::uint64_t seed)
{
    if (m.kind != ModelKind::cvae)
        throw ConfigError("sample_cvae needs a CVAE model, got " + to_string(m.kind));
    if (total < m.num_classes)
        throw ConfigError("sample_cvae needs at least one sample per class");
    LabeledGeneration g;
    const auto counts = class_counts(total, m.num_classes);
    for (std::size_t c = 0; c < counts.size(); ++c)
        g.labels.insert(g.labels.end(), counts[c], static_cast<int>(c));
    g.samples = decode(m, standard_normal_latents(total, m.latent_dim, seed), g.labels);
    return g;
}

void save_model(const GenerativeModel& m, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    nn::save_params(dir / "trunk.ornn", m.trunk, m.trunk_params);
    nn::save_params(dir / "head.ornn", m.head, m.head_params);
    nn::save_params(dir / "decoder.ornn", m.decoder, m.decoder_params);
    nlohmann::json j = {{"kind", to_string(m.kind)}, {"latent_dim", m.latent_dim}, {"num_classes", m.num_classes}};
    auto& curve = j["loss_curve"] = nlohmann::json::array();
    for (const auto& l : m.loss_curve)
        curve.push_back({{"reconstruction", l.reconstruction}, {"kl", l.kl}, {"total", l.total}});
    std::ofstream os(dir / "model.json");
    if (!os)
        throw Error("cannot write " + (dir / "model.json").string());
    os << j.dump(2) << '\n';
}

GenerativeModel load_model(const std::filesystem::path& dir)
{
    std::ifstream is(dir / "model.json");
    if (!is)
        throw Error("cannot read " + (dir / "model.json").string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed model sidecar " + (dir / "model.json").string() + ": " + e.what());
    }
    auto m = make_model(model_kind_from_string(j.at("kind").get<std::string>()), j.at("latent_dim").get<std::size_t>(),
                        j.at("num_classes").get<std::size_t>());
    m.trunk_params = nn::load_params(dir / "trunk.ornn", m.trunk);
    m.head_params = nn::load_params(dir / "head.ornn", m.head);
    m.decoder_params = nn::load_params(dir / "decoder.ornn", m.decoder);
    if (j.contains("loss_curve"))
        for (const auto& l : j["loss_curve"])
            m.loss_curve.push_back({l.at("reconstruction"), l.at("kl"), l.at("total")});
    return m;
}

} // namespace rfaug::gen
