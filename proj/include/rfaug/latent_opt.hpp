// rfaug/latent_opt.hpp
//
// Blind outlier generation by optimizing latent codes against a judge.
//
// The judge is a closed-set classifier with |A| + 1 outputs whose last class
// is "outlier"; it starts with no samples of that class. For an authorized
// sample x with code e = E(x), a latent z is pushed towards the outlier
// class while staying close to e:
//
//   f(z) = ||e - z|| + lambda * CE(onehot(|A|), softmax(C(D(z))))
//
// Each outer iteration optimizes one z per x (cycling through X until the
// requested count is reached), decodes the winners and, unless it is the
// last iteration, warm-starts the judge on X plus those samples labeled |A|.
#pragma once

#include "rfaug/generative.hpp"
#include "rfaug/network.hpp"
#include "rfaug/signal.hpp"
#include "rfaug/train.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace rfaug::latent {

struct Judge {
    nn::Network net; // emits |A| + 1 logits
    std::vector<float> params;
    std::size_t num_authorized = 0;

    std::size_t outlier_class() const { return num_authorized; }
};

// Softmax cross-entropy over |A| + 1 classes; labels in 0..|A|-1. Throws
// ConfigError for fewer than two authorized classes.
Judge train_judge(const std::vector<SignalSample>& xs, const std::vector<int>& labels, std::size_t num_authorized,
                  const nn::TrainConfig& cfg);

// Continues training from the current parameters; labels may include
// outlier_class().
void retrain_judge(Judge& judge, const std::vector<SignalSample>& xs, const std::vector<int>& labels,
                   const nn::TrainConfig& cfg);

// Row i holds the |A| + 1 class probabilities of xs[i].
std::vector<std::vector<float>> judge_probabilities(const Judge& judge, const std::vector<SignalSample>& xs);
std::vector<int> judge_predict(const Judge& judge, const std::vector<SignalSample>& xs);

struct OptConfig {
    std::size_t inner_steps = 200;
    float inner_lr = 0.05f;
    std::size_t outer_iters = 3;
    float lambda = 1.0f;
    float init_noise_std = 0.01f;
    std::size_t count = 7500;
    std::size_t batch_size = 64; // latents optimized together
    std::size_t retrain_epochs = 5;
    nn::TrainConfig judge_train{1e-3f, 64, 30, 0, nn::OptimizerKind::adam_like};
    std::uint64_t seed = 0;

    void validate() const;
};

// Per-sample objective values and gradients d f / d z for a batch of
// latents with anchors e. Throws Error("non-finite objective") when
// `strict` and any value is not finite; otherwise such rows carry NaN.
struct ObjectiveBatch {
    std::vector<double> value;
    std::vector<std::vector<float>> grad;
};
ObjectiveBatch outlier_objective_batch(const std::vector<std::vector<float>>& z,
                                       const std::vector<std::vector<float>>& anchor, const gen::AEModel& ae,
                                       const Judge& judge, float lambda, bool with_grad, bool strict);

double outlier_objective(std::span<const float> z, std::span<const float> anchor, const gen::AEModel& ae,
                         const Judge& judge, float lambda);
std::vector<float> outlier_objective_grad(std::span<const float> z, std::span<const float> anchor,
                                          const gen::AEModel& ae, const Judge& judge, float lambda);

struct LatentResult {
    std::vector<float> z;     // best iterate
    double initial = 0.0;     // f(z0)
    double best = 0.0;        // f(z), never above initial
    bool aborted = false;     // a non-finite objective stopped this sample
};

// Gradient descent from z0 = anchor + N(0, init_noise_std^2 I), keeping the
// best iterate. Sample i draws its start from substream(seed, i).
std::vector<LatentResult> optimize_latents(const std::vector<std::vector<float>>& anchors, const gen::AEModel& ae,
                                           const Judge& judge, const OptConfig& cfg, std::uint64_t seed);
LatentResult optimize_latent(const SignalSample& x, const gen::AEModel& ae, const Judge& judge,
                             const OptConfig& cfg);

struct IterationStats {
    std::size_t attempted = 0;
    std::size_t aborted = 0;
    double mean_initial = 0.0;
    double mean_best = 0.0;
    double judged_outlier = 0.0; // share labeled outlier_class() by the judge used in this iteration
    bool objective_monotone = true;
};

struct Algorithm1Result {
    std::vector<SignalSample> samples; // O^(N-1)
    Judge judge;                       // C^(N-1), the judge that produced them
    std::vector<IterationStats> iterations;
    std::size_t retrains = 0;
};

// Trains C^(0) on (xs, labels) and runs the outer loop. Throws
// Error("algorithm1 unstable") when more than half the optimizations of an
// iteration abort.
Algorithm1Result run_algorithm1(const std::vector<SignalSample>& xs, const std::vector<int>& labels,
                                 std::size_t num_authorized, const gen::AEModel& ae, const OptConfig& cfg);
// Same, starting from a given judge.
Algorithm1Result run_algorithm1(const std::vector<SignalSample>& xs, const std::vector<int>& labels, Judge judge,
                                const gen::AEModel& ae, const OptConfig& cfg);

} // namespace rfaug::latent
