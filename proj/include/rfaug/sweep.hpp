// rfaug/sweep.hpp
//
// Experiment sweeps comparing OvA accuracy with and without generated
// outliers. A cell is one (size, seed) pair; its arms share the split, the
// seed and the initial weights and differ only in the appended samples.
//
// Transmitter roles per seed come from a seeded shuffle of the corpus ids:
//   supervised: A = first |A|, O = next |O|, K = prefix of the rest
//   blind:      O = first |O|, A = prefix of the rest, and the last
//               `tuning_outliers` ids serve as outliers for choosing delta
#pragma once

#include "rfaug/generative.hpp"
#include "rfaug/latent_opt.hpp"
#include "rfaug/openset.hpp"
#include "rfaug/signal.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace rfaug::sweep {

enum class Method { vae, cvae, ellipsoid, latent_opt };

std::string to_string(Method m);
// Accepts "latent-opt" as well as "latent_opt". Throws ConfigError.
Method method_from_string(const std::string& s);
std::vector<Method> methods_from_list(const std::string& comma_separated);

struct Row {
    std::string method;
    std::size_t authorized = 0;
    std::size_t known = 0;
    std::optional<double> delta;
    std::uint64_t seed = 0;
    std::string arm; // "aug" or "nonaug"
    std::optional<double> accuracy;
    double train_seconds = 0.0;
    double gen_seconds = 0.0;
    std::string status = "ok"; // or "failed: <reason>"
};

struct DeltaRow {
    double delta = 0.0;
    std::size_t authorized = 0;
    std::uint64_t seed = 0;
    std::optional<double> val_accuracy; // on the tuning set
    double outside_fraction = 0.0;
    std::string status = "ok";
};

struct SupervisedConfig {
    std::size_t authorized = 10;
    std::vector<std::size_t> known_sizes{5, 10, 15, 20, 25};
    std::size_t test_outliers = 10;
    std::vector<Method> methods{Method::vae, Method::cvae};
    std::vector<std::uint64_t> seeds{0, 1, 2};
    std::size_t count = 7500;
    gen::GenConfig gen;
    openset::OvAConfig ova;
    std::size_t jobs = 1;

    void validate() const;
};

struct BlindConfig {
    std::vector<std::size_t> authorized_sizes{5, 10, 15, 20, 25};
    std::size_t test_outliers = 10;
    std::size_t tuning_outliers = 5;
    std::vector<Method> methods{Method::ellipsoid, Method::latent_opt};
    std::vector<double> delta_grid{0.05, 0.1, 0.2, 0.4, 0.8, 1.6};
    std::optional<double> delta; // skips tuning when set
    std::vector<std::uint64_t> seeds{0, 1, 2};
    std::size_t count = 7500;
    gen::GenConfig autoencoder;
    latent::OptConfig latent;
    openset::OvAConfig ova;
    std::size_t jobs = 1;

    void validate() const;
};

// Mean accuracies of one method at one size, with the per-seed values.
struct ExperimentResult {
    std::string method;
    std::size_t size = 0; // |K| for supervised sweeps, |A| for blind ones
    std::vector<std::uint64_t> seeds;
    std::vector<double> accuracy_nonaug_per_seed;
    std::vector<double> accuracy_aug_per_seed;
    double accuracy_nonaug = 0.0;
    double accuracy_aug = 0.0;
    double train_seconds = 0.0;
    double gen_seconds = 0.0;
};

struct SweepResult {
    std::vector<Row> rows;
    std::vector<DeltaRow> delta_table;
    std::optional<double> tuned_delta;
    nlohmann::json manifest = nlohmann::json::object();

    bool failed() const;
    std::vector<ExperimentResult> summarize(bool by_known) const;
};

// Throws ConfigError("population too small: ...") when the corpus cannot
// supply the requested roles. Failures inside a cell become failure rows.
SweepResult run_supervised_sweep(const Corpus& corpus, const SupervisedConfig& cfg);
SweepResult run_blind_sweep(const Corpus& corpus, const BlindConfig& cfg);

// Timing columns stay empty unless `timings`, which keeps reruns
// byte-identical.
std::string rows_csv(const std::vector<Row>& rows, bool timings);
std::string delta_csv(const std::vector<DeltaRow>& rows);
std::vector<Row> parse_rows_csv(const std::string& text);
std::vector<DeltaRow> parse_delta_csv(const std::string& text);

} // namespace rfaug::sweep
