// rfaug/generative.hpp
//
// VAE, conditional VAE and plain autoencoder over 256x2 signals.
//
// All three share one layout: a convolutional encoder trunk, a dense head
// and a transposed-convolution decoder. A VAE head emits (mu, logvar), an
// autoencoder head emits z directly. A CVAE concatenates the one-hot class
// vector to the trunk output (the head input) and to the decoder input.
//
// Training loss per batch:
//   reconstruction  sum over the 512 values of (x_hat - x)^2, mean over the batch
//   kl              gaussian_kl(mu, logvar), VAE and CVAE only
//   total           reconstruction + beta * kl
#pragma once

#include "rfaug/network.hpp"
#include "rfaug/signal.hpp"
#include "rfaug/train.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace rfaug::gen {

enum class ModelKind { vae, cvae, ae };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

inline constexpr std::size_t default_latent_dim = 32;
inline constexpr std::size_t default_generation_count = 7500;

struct GenConfig {
    std::size_t latent_dim = default_latent_dim;
    float beta = 1.0f;
    nn::TrainConfig train{1e-3f, 64, 30, 0, nn::OptimizerKind::adam_like};

    void validate() const;
};

struct EpochLoss {
    double reconstruction = 0.0;
    double kl = 0.0;
    double total = 0.0;
};

struct GenerativeModel {
    ModelKind kind = ModelKind::vae;
    std::size_t latent_dim = 0;
    std::size_t num_classes = 0; // zero unless kind == cvae
    nn::Network trunk, head, decoder;
    std::vector<float> trunk_params, head_params, decoder_params;
    std::vector<EpochLoss> loss_curve;

    std::size_t conditions() const { return kind == ModelKind::cvae ? num_classes : 0; }
};

using VAEModel = GenerativeModel;
using CVAEModel = GenerativeModel;
using AEModel = GenerativeModel;

// Requires >= 50 samples. Throws "training diverged at epoch k".
VAEModel train_vae(const std::vector<SignalSample>& samples, const GenConfig& cfg);

// Labels in 0..num_classes-1, each class with >= 10 samples. A label
// outside that range throws ConfigError("label out of range").
CVAEModel train_cvae(const std::vector<SignalSample>& samples, const std::vector<int>& labels,
                     std::size_t num_classes, const GenConfig& cfg);

// Deterministic encoder; beta is ignored.
AEModel train_autoencoder(const std::vector<SignalSample>& samples, const GenConfig& cfg);

// Mean loss of a trained model on a sample set, with a fixed noise draw for
// the reparameterization.
EpochLoss evaluate_loss(const GenerativeModel& m, const std::vector<SignalSample>& samples,
                        const std::vector<int>& labels, float beta, std::uint64_t seed);

// Latent codes, one row of latent_dim values per sample. A VAE returns mu.
std::vector<std::vector<float>> encode(const GenerativeModel& m, const std::vector<SignalSample>& xs,
                                       const std::vector<int>& labels = {});
std::vector<float> encode(const GenerativeModel& m, const SignalSample& x, int label = 0);

std::vector<SignalSample> decode(const GenerativeModel& m, const std::vector<std::vector<float>>& zs,
                                 const std::vector<int>& labels = {});
SignalSample decode(const GenerativeModel& m, std::span<const float> z, int label = 0);

// count decodes of z ~ N(0, I). Sample i draws from substream(seed, i), so
// any prefix of a larger request is identical.
std::vector<SignalSample> sample_vae(const VAEModel& m, std::size_t count, std::uint64_t seed);

// Per class floor(total / num_classes) samples, the remainder going to the
// lowest class ids. Returned in class order.
struct LabeledGeneration {
    std::vector<SignalSample> samples;
    std::vector<int> labels;
};
std::vector<std::size_t> class_counts(std::size_t total, std::size_t num_classes);
LabeledGeneration sample_cvae(const CVAEModel& m, std::size_t total, std::uint64_t seed);

// <dir>/{trunk,head,decoder}.ornn plus <dir>/model.json holding kind,
// latent_dim and num_classes.
void save_model(const GenerativeModel& m, const std::filesystem::path& dir);
GenerativeModel load_model(const std::filesystem::path& dir);

} // namespace rfaug::gen
