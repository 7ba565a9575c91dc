// rfaug/openset.hpp
//
// The open-set evaluator: split protocol, One-vs-All classifier and the
// |A|+1-way accuracy metric.
//
// Split protocol for authorized set A, known outliers K, test outliers O:
//   - per authorized transmitter, a seeded 70/30 split; the 70% goes to the
//     train+val pool, the 30% to test
//   - every sample of K goes to the pool
//   - the shuffled pool is split 80/20 into train and validation
//   - test additionally holds every sample of O
// Fractions use floor(n * 7 / 10) and floor(m * 8 / 10).

#pragma once

#include "rfaug/network.hpp"
#include "rfaug/signal.hpp"
#include "rfaug/train.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace rfaug::openset {

// Labels 0..|A|-1 are authorized classes (in SplitSpec order); `outlier`
// is the |A|+1-th decision.
inline constexpr int outlier = -1;

struct SplitSpec {
    std::vector<std::uint16_t> authorized;
    std::vector<std::uint16_t> known_outliers;
    std::vector<std::uint16_t> test_outliers;
    std::uint64_t seed = 0;

    // Throws ConfigError("invalid split spec: ...").
    void validate() const;
};

struct Example {
    SignalSample sample;
    int label = outlier;
    std::uint16_t tx_id = 0;
    std::size_t source = 0; // index into the corpus
};

struct Split {
    std::vector<Example> train, val, test;

    // FNV-1a over the (partition, corpus index) sequence; equal hashes mean
    // the same samples in the same order.
    std::uint64_t hash() const;
};

Split make_split(const Corpus& corpus, const SplitSpec& spec);

struct OvAConfig {
    nn::TrainConfig train{1e-3f, 64, 30, 0, nn::OptimizerKind::adam_like};
    std::size_t patience = 10; // epochs without validation improvement
    float threshold = 0.5f;
};

// Shared feature extractor plus |A| sigmoid heads. `net` emits the head
// logits; head_outputs() applies the sigmoid.
struct OvAModel {
    nn::Network net;
    std::vector<float> params;
    std::size_t num_authorized = 0;
    float threshold = 0.5f;
    std::vector<double> train_curve;
    std::vector<double> val_curve;
    std::size_t best_epoch = 0;
};

// Head targets for one label: one-hot for an authorized class, all zeros
// for an outlier.
std::vector<float> ova_targets(int label, std::size_t num_authorized);

// Per-head binary cross-entropy. Generated outliers are appended to the
// training set with all-zero targets. The parameters with the lowest
// validation loss are kept.
OvAModel train_ova(const std::vector<Example>& train, const std::vector<Example>& val, std::size_t num_authorized,
                   const OvAConfig& cfg, const std::vector<SignalSample>& augmentation = {});

// outlier when every head is below threshold, else the highest head
// (lowest index on ties).
int decide(std::span<const float> heads, float threshold);

std::vector<float> head_outputs(const OvAModel& m, const SignalSample& x);
int predict(const OvAModel& m, const SignalSample& x);
std::vector<int> predict(const OvAModel& m, const std::vector<SignalSample>& xs);

// Fraction of exact matches over the |A|+1-way decision; throws on an empty set.
double accuracy(std::span<const int> predicted, std::span<const int> truth);
double evaluate(const OvAModel& m, const std::vector<Example>& test);

std::vector<SignalSample> samples_of(const std::vector<Example>& xs);
std::vector<int> labels_of(const std::vector<Example>& xs);

} // namespace rfaug::openset
