// rfaug: corpus simulation, generator training, outlier generation,
// open-set evaluation and experiment sweeps.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 runtime failure.

#include "rfaug/config_json.hpp"
#include "rfaug/corpus_io.hpp"
#include "rfaug/error.hpp"
#include "rfaug/fingerprint_sim.hpp"
#include "rfaug/generative.hpp"
#include "rfaug/latent_opt.hpp"
#include "rfaug/mvee.hpp"
#include "rfaug/openset.hpp"
#include "rfaug/report.hpp"
#include "rfaug/rng.hpp"
#include "rfaug/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rfaug;

namespace {

constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

struct Globals {
    std::uint64_t seed = 0;
    fs::path out_dir = "out";
    std::size_t jobs = 1;
    bool paper_scale = false;
    std::optional<fs::path> config;
    json file = json::object(); // parsed --config

    // Section of the config file, or an empty object.
    json section(const char* name) const
    {
        const auto it = file.find(name);
        return it == file.end() ? json::object() : *it;
    }
};

std::string read_text(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    if (!is)
        throw Error("cannot read " + p.string());
    return {std::istreambuf_iterator<char>(is), {}};
}

void write_text(const fs::path& p, const std::string& text)
{
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os || !(os << text))
        throw Error("cannot write " + p.string());
}

// "3,5,7" and ranges like "0-9".
template <class T>
std::vector<T> parse_list(const std::string& s, const char* what)
{
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    try {
        while (std::getline(ss, item, ',')) {
            if (item.empty())
                continue;
            const auto dash = item.find('-', 1);
            if (dash != std::string::npos) {
                const auto lo = std::stoull(item.substr(0, dash)), hi = std::stoull(item.substr(dash + 1));
                if (hi < lo)
                    throw ConfigError(std::string("bad range in ") + what + ": " + item);
                for (auto v = lo; v <= hi; ++v)
                    out.push_back(static_cast<T>(v));
            } else {
                std::size_t used = 0;
                const auto v = std::stoull(item, &used);
                if (used != item.size())
                    throw ConfigError(std::string("bad number in ") + what + ": " + item);
                out.push_back(static_cast<T>(v));
            }
        }
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const ConfigError*>(&e))
            throw;
        throw ConfigError(std::string("bad number in ") + what + ": " + item);
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* what)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ConfigError(std::string("bad number in ") + what + ": " + item);
        }
    }
    return out;
}

std::vector<std::uint16_t> ids_option(const std::optional<std::string>& s, const char* flag)
{
    if (!s)
        return {};
    auto v = parse_list<std::uint16_t>(*s, flag);
    if (v.empty())
        throw ConfigError(std::string(flag) + " lists no transmitters");
    return v;
}

std::vector<std::uint16_t> required_ids(const std::optional<std::string>& s, const char* flag)
{
    if (!s)
        throw ConfigError(std::string(flag) + " is required");
    return ids_option(s, flag);
}

// Samples of the listed transmitters with their position in the list.
void samples_by_id(const Corpus& c, const std::vector<std::uint16_t>& ids, std::vector<SignalSample>& xs,
                   std::vector<int>& labels)
{
    const auto present = c.tx_ids();
    for (auto id : ids)
        if (std::find(present.begin(), present.end(), id) == present.end())
            throw ConfigError("transmitter " + std::to_string(id) + " is not in the corpus");
    for (const auto& s : c.samples) {
        const auto it = std::find(ids.begin(), ids.end(), s.tx_id);
        if (it == ids.end())
            continue;
        xs.push_back(s.sample);
        labels.push_back(static_cast<int>(it - ids.begin()));
    }
}

template <class T>
void override_with(const std::optional<T>& flag, T& field)
{
    if (flag)
        field = *flag;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
    std::optional<std::size_t> tx, packets_min, packets_max;
    std::optional<std::string> channel;
    std::optional<double> snr_db, rician_k_db;
    std::optional<fs::path> output;
};

int cmd_simulate(const Globals& g, const SimulateArgs& a)
{
    sim::CorpusConfig cfg;
    config::apply(g.section("corpus"), cfg);
    cfg.seed = g.seed;
    override_with(a.packets_min, cfg.packets_min);
    override_with(a.packets_max, cfg.packets_max);
    if (a.channel)
        cfg.channel.model = channel_model_from_string(*a.channel);
    override_with(a.snr_db, cfg.channel.snr_db);
    override_with(a.rician_k_db, cfg.channel.rician_k_db);
    std::size_t tx = g.paper_scale ? 71 : 40;
    if (g.file.contains("tx"))
        tx = g.file.at("tx").get<std::size_t>();
    override_with(a.tx, tx);
    cfg.validate();

    const auto corpus = sim::generate_corpus(sim::synth_population(tx, g.seed), cfg);
    const fs::path out = a.output.value_or(g.out_dir / "corpus.orff");
    if (out.has_parent_path())
        fs::create_directories(out.parent_path());
    save_corpus(corpus, out);
    std::cout << "wrote " << corpus.size() << " samples from " << tx << " transmitters to " << out.string() << "\n";
    std::cout << "tx_id count\n";
    for (auto [id, n] : corpus.counts())
        std::cout << id << " " << n << "\n";
    return 0;
}

// ---- train-gen -------------------------------------------------------------

struct TrainGenArgs {
    std::optional<fs::path> corpus, output;
    std::string method = "cvae";
    std::optional<std::string> ids;
    std::optional<std::size_t> latent_dim, epochs, batch_size;
    std::optional<float> beta, lr;
};

int cmd_train_gen(const Globals& g, const TrainGenArgs& a)
{
    const auto kind = gen::model_kind_from_string(a.method);
    gen::GenConfig cfg;
    config::apply(g.section("gen"), cfg);
    cfg.train.seed = g.seed;
    override_with(a.latent_dim, cfg.latent_dim);
    override_with(a.epochs, cfg.train.epochs);
    override_with(a.batch_size, cfg.train.batch_size);
    override_with(a.beta, cfg.beta);
    override_with(a.lr, cfg.train.learning_rate);
    if (!a.corpus)
        throw ConfigError("--corpus is required");
    const auto ids = required_ids(a.ids, "--ids");
    const auto corpus = load_corpus(*a.corpus);

    std::vector<SignalSample> xs;
    std::vector<int> labels;
    samples_by_id(corpus, ids, xs, labels);
    const auto t0 = std::chrono::steady_clock::now();
    gen::GenerativeModel m;
    switch (kind) {
    case gen::ModelKind::vae: m = gen::train_vae(xs, cfg); break;
    case gen::ModelKind::cvae: m = gen::train_cvae(xs, labels, ids.size(), cfg); break;
    case gen::ModelKind::ae: m = gen::train_autoencoder(xs, cfg); break;
    }
    const fs::path out = a.output.value_or(g.out_dir / ("model-" + a.method));
    gen::save_model(m, out);
    const json info = {{"method", a.method}, {"corpus", a.corpus->string()}, {"ids", ids},
                       {"samples", xs.size()}, {"config", config::to_json(cfg)},
                       {"train_seconds", seconds_since(t0)}};
    write_text(out / "train.json", info.dump(2) + "\n");
    std::cout << "trained " << a.method << " on " << xs.size() << " samples; final loss "
              << m.loss_curve.back().total << "; saved to " << out.string() << "\n";
    return 0;
}

// ---- generate --------------------------------------------------------------

struct GenerateArgs {
    std::string method;
    std::optional<fs::path> model, corpus, output;
    std::optional<std::string> authorized;
    std::size_t count = 7500;
    std::optional<double> delta;
    std::optional<std::size_t> outer_iters, inner_steps;
    std::optional<float> inner_lr, lambda, init_noise_std;
};

int cmd_generate(const Globals& g, const GenerateArgs& a)
{
    const auto method = sweep::method_from_string(a.method);
    if (!a.model)
        throw ConfigError("--model is required");
    if (a.count == 0)
        throw ConfigError("--count must be positive");
    const auto model = gen::load_model(*a.model);
    const auto need = [&](gen::ModelKind k) {
        if (model.kind != k)
            throw ConfigError("method " + a.method + " needs a model of kind " + gen::to_string(k) + ", " +
                              a.model->string() + " holds kind " + gen::to_string(model.kind));
    };

    json manifest = {{"method", sweep::to_string(method)},
                     {"count", a.count},
                     {"seed", g.seed},
                     {"model", a.model->string()}};
    std::vector<SignalSample> out;
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t sample_seed = derive_seed(g.seed, stream::sample);
    if (method == sweep::Method::vae) {
        need(gen::ModelKind::vae);
        out = gen::sample_vae(model, a.count, sample_seed);
    } else if (method == sweep::Method::cvae) {
        need(gen::ModelKind::cvae);
        auto r = gen::sample_cvae(model, a.count, sample_seed);
        manifest["per_class_counts"] = gen::class_counts(a.count, model.num_classes);
        out = std::move(r.samples);
    } else {
        need(gen::ModelKind::ae);
        if (method == sweep::Method::ellipsoid && !a.delta)
            throw ConfigError("--delta is required for the ellipsoidal method; choose it with "
                              "`rfaug sweep --methods ellipsoid`, which tunes delta on a grid");
        if (!a.corpus)
            throw ConfigError("--corpus with the authorized samples is required for " + a.method);
        const auto ids = required_ids(a.authorized, "--authorized");
        const auto corpus = load_corpus(*a.corpus);
        std::vector<SignalSample> xs;
        std::vector<int> labels;
        samples_by_id(corpus, ids, xs, labels);
        manifest["corpus"] = a.corpus->string();
        manifest["authorized"] = ids;
        if (method == sweep::Method::ellipsoid) {
            auto r = mvee::generate_ellipsoidal_outliers(model, xs, *a.delta, a.count, derive_seed(g.seed, stream::shell));
            manifest["delta"] = *a.delta;
            manifest["mvee_iterations"] = r.mvee_iterations;
            manifest["outside_fraction"] = r.outside_fraction;
            out = std::move(r.samples);
        } else {
            latent::OptConfig cfg;
            config::apply(g.section("latent"), cfg);
            cfg.seed = g.seed;
            cfg.judge_train.seed = g.seed;
            cfg.count = a.count;
            override_with(a.outer_iters, cfg.outer_iters);
            override_with(a.inner_steps, cfg.inner_steps);
            override_with(a.inner_lr, cfg.inner_lr);
            override_with(a.lambda, cfg.lambda);
            override_with(a.init_noise_std, cfg.init_noise_std);
            if (ids.size() < 2)
                throw ConfigError("latent-opt needs at least two authorized transmitters");
            auto r = latent::run_algorithm1(xs, labels, ids.size(), model, cfg);
            manifest["N"] = cfg.outer_iters;
            manifest["inner_steps"] = cfg.inner_steps;
            manifest["inner_lr"] = cfg.inner_lr;
            manifest["lambda"] = cfg.lambda;
            manifest["init_noise_std"] = cfg.init_noise_std;
            manifest["retrains"] = r.retrains;
            json its = json::array();
            for (const auto& st : r.iterations)
                its.push_back({{"attempted", st.attempted},
                               {"aborted", st.aborted},
                               {"mean_initial", st.mean_initial},
                               {"mean_best", st.mean_best},
                               {"judged_outlier", st.judged_outlier}});
            manifest["iterations"] = its;
            out = std::move(r.samples);
        }
    }
    manifest["gen_seconds"] = seconds_since(t0);
    const fs::path path = a.output.value_or(g.out_dir / ("outliers-" + sweep::to_string(method) + ".orff"));
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    save_corpus(make_outlier_corpus(out, manifest), path);
    std::cout << "wrote " << out.size() << " " << sweep::to_string(method) << " outliers to " << path.string()
              << "\n";
    return 0;
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateArgs {
    std::optional<fs::path> corpus, augment;
    std::optional<std::string> authorized, known, test_outliers;
    std::optional<std::size_t> epochs, patience;
    std::optional<float> threshold;
};

int cmd_evaluate(const Globals& g, const EvaluateArgs& a)
{
    if (!a.corpus)
        throw ConfigError("--corpus is required");
    openset::OvAConfig cfg;
    config::apply(g.section("ova"), cfg);
    cfg.train.seed = g.seed;
    override_with(a.epochs, cfg.train.epochs);
    override_with(a.patience, cfg.patience);
    override_with(a.threshold, cfg.threshold);

    openset::SplitSpec spec;
    spec.authorized = required_ids(a.authorized, "--authorized");
    spec.known_outliers = ids_option(a.known, "--known");
    spec.test_outliers = ids_option(a.test_outliers, "--test-outliers");
    spec.seed = g.seed;
    const auto corpus = load_corpus(*a.corpus);
    const auto split = openset::make_split(corpus, spec);
    std::vector<SignalSample> augmentation;
    if (a.augment)
        for (const auto& s : load_corpus(*a.augment).samples)
            augmentation.push_back(s.sample);

    const auto t0 = std::chrono::steady_clock::now();
    const auto m = openset::train_ova(split.train, split.val, spec.authorized.size(), cfg, augmentation);
    const double acc = openset::evaluate(m, split.test);
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(split.hash()));
    const json result = {{"accuracy", acc},
                         {"split_hash", hash},
                         {"train", split.train.size()},
                         {"val", split.val.size()},
                         {"test", split.test.size()},
                         {"augmentation", augmentation.size()},
                         {"best_epoch", m.best_epoch},
                         {"train_seconds", seconds_since(t0)},
                         {"config", config::to_json(cfg)}};
    fs::create_directories(g.out_dir);
    write_text(g.out_dir / "evaluate.json", result.dump(2) + "\n");
    std::cout << "accuracy " << acc << " (train " << split.train.size() << ", val " << split.val.size() << ", test "
              << split.test.size() << ", augmentation " << augmentation.size() << ")\n";
    return 0;
}

// ---- sweep / report --------------------------------------------------------

struct SweepArgs {
    std::optional<fs::path> corpus;
    std::string methods = "vae,cvae";
    std::size_t seeds = 3;
    std::optional<std::string> known_sizes, authorized_sizes, delta_grid;
    std::optional<std::size_t> authorized, test_outliers, tuning_outliers, count, epochs, gen_epochs;
    std::optional<double> delta;
    std::optional<std::size_t> outer_iters, inner_steps;
    std::optional<float> inner_lr, lambda;
    bool csv_timings = false;
};

void write_figures(const fs::path& dir, const std::vector<sweep::Row>& rows, const std::vector<sweep::DeltaRow>& d,
                   const std::string& prefix)
{
    for (const auto& f : report::sweep_figures(rows, d))
        write_text(dir / (prefix + f.file_name), f.svg);
}

int cmd_sweep(const Globals& g, const SweepArgs& a)
{
    if (!a.corpus)
        throw ConfigError("--corpus is required");
    if (a.seeds == 0)
        throw ConfigError("--seeds must be at least 1");
    const auto methods = sweep::methods_from_list(a.methods);
    std::vector<sweep::Method> supervised, blind;
    for (auto m : methods)
        (m == sweep::Method::vae || m == sweep::Method::cvae ? supervised : blind).push_back(m);
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < a.seeds; ++i)
        seeds.push_back(g.seed + i);

    const auto corpus = load_corpus(*a.corpus);
    const std::size_t population = corpus.tx_ids().size();
    fs::create_directories(g.out_dir);
    bool failed = false;
    int code = 0;

    if (!supervised.empty()) {
        sweep::SupervisedConfig cfg;
        config::apply(g.section("supervised"), cfg);
        cfg.methods = supervised;
        cfg.seeds = seeds;
        cfg.jobs = g.jobs;
        override_with(a.authorized, cfg.authorized);
        if (a.known_sizes)
            cfg.known_sizes = parse_list<std::size_t>(*a.known_sizes, "--known-sizes");
        override_with(a.count, cfg.count);
        override_with(a.epochs, cfg.ova.train.epochs);
        override_with(a.gen_epochs, cfg.gen.train.epochs);
        if (a.test_outliers)
            cfg.test_outliers = *a.test_outliers;
        else if (g.paper_scale)
            cfg.test_outliers = 30;
        else if (!g.section("supervised").contains("test_outliers")) {
            // The desk corpus cannot hold |A| + 25 + 10 transmitters; |O|
            // shrinks to what is left, and stays fixed across |K|.
            const std::size_t used = cfg.authorized + *std::max_element(cfg.known_sizes.begin(), cfg.known_sizes.end());
            cfg.test_outliers = population > used ? std::min<std::size_t>(10, population - used) : 10;
        }
        const auto t0 = std::chrono::steady_clock::now();
        const auto res = sweep::run_supervised_sweep(corpus, cfg);
        auto manifest = res.manifest;
        manifest["corpus"] = a.corpus->string();
        manifest["seed"] = g.seed;
        manifest["csv_timings"] = a.csv_timings;
        manifest["wall_seconds"] = seconds_since(t0);
        write_text(g.out_dir / "supervised.csv", sweep::rows_csv(res.rows, a.csv_timings));
        write_text(g.out_dir / "supervised_manifest.json", manifest.dump(2) + "\n");
        write_figures(g.out_dir, res.rows, {}, "supervised_");
        std::cout << report::summary_table(res.rows);
        failed = failed || res.failed();
    }
    if (!blind.empty()) {
        sweep::BlindConfig cfg;
        if (g.paper_scale)
            cfg.test_outliers = 30;
        config::apply(g.section("blind"), cfg);
        cfg.methods = blind;
        cfg.seeds = seeds;
        cfg.jobs = g.jobs;
        if (a.authorized_sizes)
            cfg.authorized_sizes = parse_list<std::size_t>(*a.authorized_sizes, "--authorized-sizes");
        if (a.delta_grid)
            cfg.delta_grid = parse_doubles(*a.delta_grid, "--delta-grid");
        if (a.delta)
            cfg.delta = *a.delta;
        override_with(a.test_outliers, cfg.test_outliers);
        override_with(a.tuning_outliers, cfg.tuning_outliers);
        override_with(a.count, cfg.count);
        override_with(a.epochs, cfg.ova.train.epochs);
        override_with(a.gen_epochs, cfg.autoencoder.train.epochs);
        override_with(a.outer_iters, cfg.latent.outer_iters);
        override_with(a.inner_steps, cfg.latent.inner_steps);
        override_with(a.inner_lr, cfg.latent.inner_lr);
        override_with(a.lambda, cfg.latent.lambda);
        const auto t0 = std::chrono::steady_clock::now();
        const auto res = sweep::run_blind_sweep(corpus, cfg);
        auto manifest = res.manifest;
        manifest["corpus"] = a.corpus->string();
        manifest["seed"] = g.seed;
        manifest["csv_timings"] = a.csv_timings;
        manifest["wall_seconds"] = seconds_since(t0);
        write_text(g.out_dir / "blind.csv", sweep::rows_csv(res.rows, a.csv_timings));
        if (!res.delta_table.empty())
            write_text(g.out_dir / "blind_delta.csv", sweep::delta_csv(res.delta_table));
        write_text(g.out_dir / "blind_manifest.json", manifest.dump(2) + "\n");
        write_figures(g.out_dir, res.rows, res.delta_table, "blind_");
        std::cout << report::summary_table(res.rows);
        if (res.tuned_delta)
            std::cout << "tuned delta " << *res.tuned_delta << "\n";
        if (manifest.contains("gen_seconds_ratio_latent_over_ellipsoid"))
            std::cout << "generation time ratio latent-opt / ellipsoid "
                      << manifest["gen_seconds_ratio_latent_over_ellipsoid"].get<double>() << "\n";
        failed = failed || res.failed();
    }
    if (failed) {
        std::cerr << "error: at least one sweep cell failed; see the status column\n";
        code = exit_runtime;
    }
    return code;
}

int cmd_report(const Globals& g, const std::optional<fs::path>& input)
{
    const fs::path in = input.value_or(g.out_dir);
    bool any = false;
    std::string summary;
    for (const char* name : {"supervised", "blind"}) {
        const fs::path csv = in / (std::string(name) + ".csv");
        if (!fs::exists(csv))
            continue;
        any = true;
        const auto rows = sweep::parse_rows_csv(read_text(csv));
        std::vector<sweep::DeltaRow> deltas;
        const fs::path dcsv = in / (std::string(name) + "_delta.csv");
        if (fs::exists(dcsv))
            deltas = sweep::parse_delta_csv(read_text(dcsv));
        write_figures(g.out_dir, rows, deltas, std::string(name) + "_");
        summary += std::string(name) + " sweep\n" + report::summary_table(rows) + "\n";
    }
    if (!any)
        throw ConfigError("no supervised.csv or blind.csv in " + in.string());
    write_text(g.out_dir / "summary.txt", summary);
    std::cout << summary;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Generative outlier augmentation for open-set RF fingerprint authentication"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Global seed")->capture_default_str();
    auto* out_dir_opt = app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
    app.add_option("--jobs", g.jobs, "Parallel sweep cells")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_flag("--paper-scale", g.paper_scale, "Paper-scale population and held-out sets (slow)");
    app.add_option("--config", g.config, "JSON file overriding defaults; flags win");
    auto* seed_opt = app.get_option("--seed");
    auto* jobs_opt = app.get_option("--jobs");

    SimulateArgs sa;
    auto* simulate = app.add_subcommand("simulate", "Simulate a transmitter population and write a corpus");
    simulate->add_option("--tx", sa.tx, "Number of transmitters (40, or 71 with --paper-scale)");
    simulate->add_option("--packets-min", sa.packets_min);
    simulate->add_option("--packets-max", sa.packets_max);
    simulate->add_option("--channel", sa.channel, "awgn, rayleigh_block or rician_block");
    simulate->add_option("--snr-db", sa.snr_db);
    simulate->add_option("--rician-k-db", sa.rician_k_db);
    simulate->add_option("-o,--output", sa.output, "Corpus file (default <out-dir>/corpus.orff)");

    TrainGenArgs ta;
    auto* train_gen = app.add_subcommand("train-gen", "Train a VAE, CVAE or autoencoder on chosen transmitters");
    train_gen->add_option("--corpus", ta.corpus)->required();
    train_gen->add_option("--method", ta.method, "vae, cvae or ae")->capture_default_str();
    train_gen->add_option("--ids", ta.ids, "Transmitters to train on, e.g. 0-4,9")->required();
    train_gen->add_option("--latent-dim", ta.latent_dim);
    train_gen->add_option("--epochs", ta.epochs);
    train_gen->add_option("--batch-size", ta.batch_size);
    train_gen->add_option("--beta", ta.beta);
    train_gen->add_option("--lr", ta.lr);
    train_gen->add_option("-o,--output", ta.output, "Model directory (default <out-dir>/model-<method>)");

    GenerateArgs ga;
    auto* generate = app.add_subcommand("generate", "Generate outliers with a trained model");
    generate->add_option("--method", ga.method, "vae, cvae, ellipsoid or latent-opt")->required();
    generate->add_option("--model", ga.model, "Model directory from train-gen")->required();
    generate->add_option("--count", ga.count)->capture_default_str();
    generate->add_option("--delta", ga.delta, "Shell thickness for the ellipsoidal method");
    generate->add_option("--corpus", ga.corpus, "Corpus holding the authorized transmitters (blind methods)");
    generate->add_option("--authorized", ga.authorized, "Authorized transmitters (blind methods)");
    generate->add_option("--outer-iters", ga.outer_iters);
    generate->add_option("--inner-steps", ga.inner_steps);
    generate->add_option("--inner-lr", ga.inner_lr);
    generate->add_option("--lambda", ga.lambda);
    generate->add_option("--init-noise-std", ga.init_noise_std);
    generate->add_option("-o,--output", ga.output, "Outlier corpus (default <out-dir>/outliers-<method>.orff)");

    EvaluateArgs ea;
    auto* evaluate = app.add_subcommand("evaluate", "Train and test an OvA classifier on one split");
    evaluate->add_option("--corpus", ea.corpus)->required();
    evaluate->add_option("--authorized", ea.authorized)->required();
    evaluate->add_option("--known", ea.known);
    evaluate->add_option("--test-outliers", ea.test_outliers);
    evaluate->add_option("--augment", ea.augment, "Outlier corpus appended to training");
    evaluate->add_option("--epochs", ea.epochs);
    evaluate->add_option("--patience", ea.patience);
    evaluate->add_option("--threshold", ea.threshold);

    SweepArgs wa;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run the supervised and/or blind experiment sweeps");
    sweep_cmd->add_option("--corpus", wa.corpus)->required();
    sweep_cmd->add_option("--methods", wa.methods, "Comma list of vae, cvae, ellipsoid, latent-opt")
        ->capture_default_str();
    sweep_cmd->add_option("--seeds", wa.seeds, "Number of seeds, starting at --seed")->capture_default_str();
    sweep_cmd->add_option("--known-sizes", wa.known_sizes, "|K| values (supervised)");
    sweep_cmd->add_option("--authorized-sizes", wa.authorized_sizes, "|A| values (blind)");
    sweep_cmd->add_option("--authorized", wa.authorized, "|A| for the supervised sweep");
    sweep_cmd->add_option("--test-outliers", wa.test_outliers, "|O|");
    sweep_cmd->add_option("--tuning-outliers", wa.tuning_outliers, "Transmitters used to tune delta");
    sweep_cmd->add_option("--delta-grid", wa.delta_grid);
    sweep_cmd->add_option("--delta", wa.delta, "Fixed delta; skips tuning");
    sweep_cmd->add_option("--count", wa.count, "Generated samples per augmented arm");
    sweep_cmd->add_option("--epochs", wa.epochs, "OvA epochs");
    sweep_cmd->add_option("--gen-epochs", wa.gen_epochs, "Generator epochs");
    sweep_cmd->add_option("--outer-iters", wa.outer_iters);
    sweep_cmd->add_option("--inner-steps", wa.inner_steps);
    sweep_cmd->add_option("--inner-lr", wa.inner_lr);
    sweep_cmd->add_option("--lambda", wa.lambda);
    sweep_cmd->add_flag("--csv-timings", wa.csv_timings, "Fill the timing columns (breaks byte-identical reruns)");

    std::optional<fs::path> report_input;
    auto* report_cmd = app.add_subcommand("report", "Plot and summarize sweep CSVs");
    report_cmd->add_option("--input", report_input, "Directory holding the sweep CSVs (default --out-dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (g.config) {
            try {
                g.file = json::parse(read_text(*g.config));
            } catch (const json::exception& e) {
                throw ConfigError("cannot parse " + g.config->string() + ": " + e.what());
            }
            if (!g.file.is_object())
                throw ConfigError("config file must hold a JSON object");
            for (const auto& item : g.file.items())
                if (item.key() != "seed" && item.key() != "out_dir" && item.key() != "jobs" && item.key() != "tx" &&
                    item.key() != "corpus" && item.key() != "gen" && item.key() != "latent" && item.key() != "ova" &&
                    item.key() != "supervised" && item.key() != "blind")
                    throw ConfigError("unknown config key " + item.key());
            try {
                if (g.file.contains("seed") && seed_opt->count() == 0)
                    g.seed = g.file.at("seed").get<std::uint64_t>();
                if (g.file.contains("jobs") && jobs_opt->count() == 0)
                    g.jobs = g.file.at("jobs").get<std::size_t>();
                if (g.file.contains("out_dir") && out_dir_opt->count() == 0)
                    g.out_dir = g.file.at("out_dir").get<std::string>();
            } catch (const json::exception& e) {
                throw ConfigError(std::string("bad global config value: ") + e.what());
            }
        }
        if (g.jobs == 0)
            throw ConfigError("--jobs must be at least 1");
        if (*simulate)
            return cmd_simulate(g, sa);
        if (*train_gen)
            return cmd_train_gen(g, ta);
        if (*generate)
            return cmd_generate(g, ga);
        if (*evaluate)
            return cmd_evaluate(g, ea);
        if (*sweep_cmd)
            return cmd_sweep(g, wa);
        return cmd_report(g, report_input);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_runtime;
    }
}
