#include "rfaug/sweep.hpp"

#include "rfaug/config_json.hpp"
#include "rfaug/error.hpp"
#include "rfaug/mvee.hpp"
#include "rfaug/rng.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace rfaug::sweep {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string hex(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Cells run on `jobs` threads; each worker keeps its kernels single-threaded
// so a cell computes the same bits regardless of scheduling.
template <class F>
void run_cells(std::size_t n, std::size_t jobs, F&& f)
{
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < std::min(jobs, n); ++t)
        workers.emplace_back([&] {
            omp_set_num_threads(1);
            for (std::size_t i; (i = next++) < n;)
                f(i);
        });
    for (auto& w : workers)
        w.join();
}

std::vector<std::uint16_t> shuffled_ids(const Corpus& corpus, std::uint64_t seed)
{
    auto ids = corpus.tx_ids();
    Rng rng = substream(seed, stream::selection);
    std::shuffle(ids.begin(), ids.end(), rng);
    return ids;
}

std::vector<std::uint16_t> take(const std::vector<std::uint16_t>& ids, std::size_t begin, std::size_t count)
{
    return {ids.begin() + static_cast<std::ptrdiff_t>(begin), ids.begin() + static_cast<std::ptrdiff_t>(begin + count)};
}

// Commas and line breaks would break the CSV.
std::string failure(const std::string& what)
{
    std::string s = "failed: " + what;
    for (auto& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r')
            ch = ';';
    return s;
}

Row make_row(Method m, std::size_t a, std::size_t k, std::uint64_t seed, const char* arm)
{
    Row r;
    r.method = to_string(m);
    r.authorized = a;
    r.known = k;
    r.seed = seed;
    r.arm = arm;
    return r;
}

void fail_rows(std::vector<Row>& rows, const std::string& what)
{
    for (auto& r : rows)
        if (r.status == "ok" && !r.accuracy)
            r.status = failure(what);
}

std::size_t max_of(const std::vector<std::size_t>& v)
{
    return v.empty() ? 0 : *std::max_element(v.begin(), v.end());
}

struct Arm {
    double accuracy = 0.0;
    double train_seconds = 0.0;
};

Arm fit_and_score(const openset::Split& s, std::size_t a, const openset::OvAConfig& cfg,
                  const std::vector<SignalSample>& augmentation)
{
    const auto t0 = Clock::now();
    const auto m = openset::train_ova(s.train, s.val, a, cfg, augmentation);
    return {openset::evaluate(m, s.test), seconds_since(t0)};
}

openset::OvAConfig ova_for(const openset::OvAConfig& base, std::uint64_t seed)
{
    auto c = base;
    c.train.seed = seed;
    return c;
}

// ---- supervised ------------------------------------------------------------

std::vector<Row> supervised_cell(const Corpus& corpus, const SupervisedConfig& cfg, std::size_t k,
                                 std::uint64_t seed, json& info)
{
    std::vector<Row> rows;
    for (auto m : cfg.methods) {
        rows.push_back(make_row(m, cfg.authorized, k, seed, "nonaug"));
        rows.push_back(make_row(m, cfg.authorized, k, seed, "aug"));
    }
    info = {{"known", k}, {"seed", seed}};
    try {
        const auto ids = shuffled_ids(corpus, seed);
        openset::SplitSpec spec;
        spec.authorized = take(ids, 0, cfg.authorized);
        spec.test_outliers = take(ids, cfg.authorized, cfg.test_outliers);
        spec.known_outliers = take(ids, cfg.authorized + cfg.test_outliers, k);
        spec.seed = seed;
        const auto split = openset::make_split(corpus, spec);
        info["split_hash"] = hex(split.hash());
        info["authorized_ids"] = spec.authorized;
        info["known_ids"] = spec.known_outliers;
        info["test_outlier_ids"] = spec.test_outliers;

        const auto ova = ova_for(cfg.ova, seed);
        const Arm base = fit_and_score(split, cfg.authorized, ova, {});

        // Known-outlier training samples, labeled by their position in K.
        std::vector<SignalSample> ys;
        std::vector<int> ys_class;
        for (const auto& e : split.train) {
            if (e.label != openset::outlier)
                continue;
            ys.push_back(e.sample);
            ys_class.push_back(static_cast<int>(
                std::find(spec.known_outliers.begin(), spec.known_outliers.end(), e.tx_id) -
                spec.known_outliers.begin()));
        }

        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
            Row& nonaug = rows[2 * mi];
            Row& aug = rows[2 * mi + 1];
            nonaug.accuracy = base.accuracy;
            nonaug.train_seconds = base.train_seconds;
            try {
                auto g = cfg.gen;
                g.train.seed = seed;
                const std::uint64_t sample_seed = derive_seed(seed, stream::sample);
                const auto t0 = Clock::now();
                std::vector<SignalSample> generated;
                if (cfg.methods[mi] == Method::vae) {
                    generated = gen::sample_vae(gen::train_vae(ys, g), cfg.count, sample_seed);
                } else {
                    const auto model = gen::train_cvae(ys, ys_class, k, g);
                    generated = gen::sample_cvae(model, cfg.count, sample_seed).samples;
                }
                aug.gen_seconds = seconds_since(t0);
                const Arm with = fit_and_score(split, cfg.authorized, ova, generated);
                aug.accuracy = with.accuracy;
                aug.train_seconds = with.train_seconds;
            } catch (const std::exception& e) {
                aug.status = failure(e.what());
            }
        }
    } catch (const std::exception& e) {
        fail_rows(rows, e.what());
    }
    return rows;
}

// ---- blind -----------------------------------------------------------------

struct BlindRoles {
    std::vector<std::uint16_t> authorized, test_outliers, tuning;
};

BlindRoles blind_roles(const Corpus& corpus, const BlindConfig& cfg, std::size_t a, std::uint64_t seed)
{
    const auto ids = shuffled_ids(corpus, seed);
    BlindRoles r;
    r.test_outliers = take(ids, 0, cfg.test_outliers);
    r.authorized = take(ids, cfg.test_outliers, a);
    r.tuning = take(ids, ids.size() - cfg.tuning_outliers, cfg.tuning_outliers);
    return r;
}

struct Prepared {
    BlindRoles roles;
    openset::Split split;
    std::vector<SignalSample> xs;
    std::vector<int> labels;
    gen::AEModel ae;
};

Prepared prepare_blind(const Corpus& corpus, const BlindConfig& cfg, std::size_t a, std::uint64_t seed)
{
    Prepared p;
    p.roles = blind_roles(corpus, cfg, a, seed);
    openset::SplitSpec spec;
    spec.authorized = p.roles.authorized;
    spec.test_outliers = p.roles.test_outliers;
    spec.seed = seed;
    p.split = openset::make_split(corpus, spec);
    p.xs = openset::samples_of(p.split.train);
    p.labels = openset::labels_of(p.split.train);
    auto g = cfg.autoencoder;
    g.train.seed = seed;
    p.ae = gen::train_autoencoder(p.xs, g);
    return p;
}

struct EllipsoidArm {
    double gen_seconds = 0.0;
    double outside_fraction = 0.0;
    std::size_t mvee_iterations = 0;
    std::vector<SignalSample> samples;
};

EllipsoidArm ellipsoid_arm(const Prepared& p, const BlindConfig& cfg, double delta, std::uint64_t seed)
{
    EllipsoidArm out;
    const auto t0 = Clock::now();
    auto g = mvee::generate_ellipsoidal_outliers(p.ae, p.xs, delta, cfg.count, derive_seed(seed, stream::shell));
    out.gen_seconds = seconds_since(t0);
    out.outside_fraction = g.outside_fraction;
    out.mvee_iterations = g.mvee_iterations;
    out.samples = std::move(g.samples);
    return out;
}

struct Tuning {
    std::vector<DeltaRow> table;
    std::optional<double> delta;
    // Test-set result of the tuned model, reused by the matching cell.
    std::optional<Row> reuse;
    std::string error;
};

Tuning tune_delta(const Corpus& corpus, const BlindConfig& cfg, std::size_t a, std::uint64_t seed)
{
    Tuning t;
    for (double d : cfg.delta_grid) {
        DeltaRow r;
        r.delta = d;
        r.authorized = a;
        r.seed = seed;
        t.table.push_back(r);
    }
    std::optional<Prepared> prep;
    try {
        prep = prepare_blind(corpus, cfg, a, seed);
    } catch (const std::exception& e) {
        t.error = e.what();
        for (auto& r : t.table)
            r.status = failure(e.what());
        return t;
    }
    // Validation holds no outliers in the blind setting, so the tuning set
    // adds every sample of the held-aside tuning transmitters.
    std::vector<openset::Example> tuning_set = prep->split.val;
    for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
        const auto& s = corpus.samples[i];
        if (std::find(prep->roles.tuning.begin(), prep->roles.tuning.end(), s.tx_id) != prep->roles.tuning.end())
            tuning_set.push_back({s.sample, openset::outlier, s.tx_id, i});
    }

    const auto ova = ova_for(cfg.ova, seed);
    std::vector<Row> test_rows(t.table.size());
    run_cells(t.table.size(), cfg.jobs, [&](std::size_t i) {
        DeltaRow& r = t.table[i];
        try {
            auto g = ellipsoid_arm(*prep, cfg, r.delta, seed);
            r.outside_fraction = g.outside_fraction;
            const auto t0 = Clock::now();
            const auto m = openset::train_ova(prep->split.train, prep->split.val, a, ova, g.samples);
            const double train_s = seconds_since(t0);
            r.val_accuracy = openset::evaluate(m, tuning_set);
            Row& tr = test_rows[i];
            tr = make_row(Method::ellipsoid, a, 0, seed, "aug");
            tr.delta = r.delta;
            tr.accuracy = openset::evaluate(m, prep->split.test);
            tr.train_seconds = train_s;
            tr.gen_seconds = g.gen_seconds;
        } catch (const std::exception& e) {
            r.status = failure(e.what());
        }
    });
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < t.table.size(); ++i)
        if (t.table[i].val_accuracy && (!best || *t.table[i].val_accuracy > *t.table[*best].val_accuracy))
            best = i;
    if (!best) {
        t.error = "delta tuning failed for every grid value";
        return t;
    }
    t.delta = t.table[*best].delta;
    t.reuse = test_rows[*best];
    return t;
}

std::vector<Row> blind_cell(const Corpus& corpus, const BlindConfig& cfg, std::size_t a, std::uint64_t seed,
                            const Tuning& tuning, std::size_t tune_a, json& info)
{
    std::vector<Row> rows;
    for (auto m : cfg.methods) {
        rows.push_back(make_row(m, a, 0, seed, "nonaug"));
        rows.push_back(make_row(m, a, 0, seed, "aug"));
    }
    info = {{"authorized", a}, {"seed", seed}};
    try {
        const auto p = prepare_blind(corpus, cfg, a, seed);
        info["split_hash"] = hex(p.split.hash());
        info["authorized_ids"] = p.roles.authorized;
        info["test_outlier_ids"] = p.roles.test_outliers;
        const auto ova = ova_for(cfg.ova, seed);
        const Arm base = fit_and_score(p.split, a, ova, {});

        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
            Row& nonaug = rows[2 * mi];
            Row& aug = rows[2 * mi + 1];
            nonaug.accuracy = base.accuracy;
            nonaug.train_seconds = base.train_seconds;
            try {
                if (cfg.methods[mi] == Method::ellipsoid) {
                    if (!tuning.delta)
                        throw Error(tuning.error.empty() ? "no delta" : tuning.error);
                    aug.delta = *tuning.delta;
                    if (tuning.reuse && a == tune_a && seed == tuning.reuse->seed) {
                        aug = *tuning.reuse;
                        continue;
                    }
                    const auto g = ellipsoid_arm(p, cfg, *tuning.delta, seed);
                    aug.gen_seconds = g.gen_seconds;
                    info["ellipsoid"] = {{"mvee_iterations", g.mvee_iterations},
                                         {"outside_fraction", g.outside_fraction}};
                    const Arm with = fit_and_score(p.split, a, ova, g.samples);
                    aug.accuracy = with.accuracy;
                    aug.train_seconds = with.train_seconds;
                } else {
                    auto lc = cfg.latent;
                    lc.seed = seed;
                    lc.judge_train.seed = seed;
                    lc.count = cfg.count;
                    const auto t0 = Clock::now();
                    const auto res = latent::run_algorithm1(p.xs, p.labels, a, p.ae, lc);
                    aug.gen_seconds = seconds_since(t0);
                    json its = json::array();
                    for (const auto& st : res.iterations)
                        its.push_back({{"attempted", st.attempted},
                                       {"aborted", st.aborted},
                                       {"mean_initial", st.mean_initial},
                                       {"mean_best", st.mean_best},
                                       {"judged_outlier", st.judged_outlier},
                                       {"objective_monotone", st.objective_monotone}});
                    info["latent_opt"] = {{"iterations", its}, {"retrains", res.retrains}};
                    const Arm with = fit_and_score(p.split, a, ova, res.samples);
                    aug.accuracy = with.accuracy;
                    aug.train_seconds = with.train_seconds;
                }
            } catch (const std::exception& e) {
                aug.status = failure(e.what());
            }
        }
    } catch (const std::exception& e) {
        fail_rows(rows, e.what());
    }
    return rows;
}

json cells_json(std::vector<json>& infos)
{
    json a = json::array();
    for (auto& i : infos)
        a.push_back(std::move(i));
    return a;
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ','))
        out.push_back(f);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

std::optional<double> parse_optional(const std::string& s)
{
    if (s.empty())
        return std::nullopt;
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw Error("corrupt csv: not a number '" + s + "'");
    }
}

std::vector<std::vector<std::string>> csv_records(const std::string& text, std::size_t fields, const char* header)
{
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line) || line != header)
        throw Error(std::string("corrupt csv: expected header '") + header + "'");
    std::vector<std::vector<std::string>> out;
    while (std::getline(ss, line)) {
        if (line.empty())
            continue;
        auto f = split_fields(line);
        if (f.size() != fields)
            throw Error("corrupt csv: expected " + std::to_string(fields) + " fields in '" + line + "'");
        out.push_back(std::move(f));
    }
    return out;
}

constexpr const char* rows_header = "method,|A|,|K|,delta,seed,arm,accuracy,train_seconds,gen_seconds,status";
constexpr const char* delta_header = "delta,|A|,seed,val_accuracy,outside_fraction,status";

} // namespace

std::string to_string(Method m)
{
    switch (m) {
    case Method::vae: return "vae";
    case Method::cvae: return "cvae";
    case Method::ellipsoid: return "ellipsoid";
    case Method::latent_opt: return "latent_opt";
    }
    return "?";
}

Method method_from_string(const std::string& s)
{
    if (s == "vae")
        return Method::vae;
    if (s == "cvae")
        return Method::cvae;
    if (s == "ellipsoid")
        return Method::ellipsoid;
    if (s == "latent_opt" || s == "latent-opt")
        return Method::latent_opt;
    throw ConfigError("unknown method '" + s + "' (expected vae, cvae, ellipsoid or latent-opt)");
}

std::vector<Method> methods_from_list(const std::string& comma_separated)
{
    std::vector<Method> out;
    for (const auto& f : split_fields(comma_separated))
        if (!f.empty())
            out.push_back(method_from_string(f));
    if (out.empty())
        throw ConfigError("no methods given");
    return out;
}

void SupervisedConfig::validate() const
{
    if (authorized < 2)
        throw ConfigError("the supervised sweep needs |A| >= 2");
    if (known_sizes.empty() || seeds.empty() || methods.empty())
        throw ConfigError("the supervised sweep needs sizes, seeds and methods");
    for (auto k : known_sizes)
        if (k == 0)
            throw ConfigError("|K| must be positive in the supervised sweep");
    for (auto m : methods)
        if (m != Method::vae && m != Method::cvae)
            throw ConfigError("supervised sweeps take vae or cvae, not " + to_string(m));
    if (count == 0)
        throw ConfigError("generation count must be positive");
    if (jobs == 0)
        throw ConfigError("--jobs must be at least 1");
    gen.validate();
}

void BlindConfig::validate() const
{
    if (authorized_sizes.empty() || seeds.empty() || methods.empty())
        throw ConfigError("the blind sweep needs sizes, seeds and methods");
    for (auto a : authorized_sizes)
        if (a < 2)
            throw ConfigError("the blind sweep needs |A| >= 2");
    for (auto m : methods)
        if (m != Method::ellipsoid && m != Method::latent_opt)
            throw ConfigError("blind sweeps take ellipsoid or latent-opt, not " + to_string(m));
    const bool ellipsoid = std::count(methods.begin(), methods.end(), Method::ellipsoid) > 0;
    if (ellipsoid && delta)
        mvee::ShellConfig{*delta, 1}.validate();
    if (ellipsoid && !delta) {
        if (delta_grid.empty())
            throw ConfigError("the ellipsoidal method needs a delta grid or a fixed delta");
        if (tuning_outliers == 0)
            throw ConfigError("delta tuning needs at least one tuning outlier transmitter");
        for (double d : delta_grid)
            mvee::ShellConfig{d, 1}.validate();
    }
    if (count == 0)
        throw ConfigError("generation count must be positive");
    if (jobs == 0)
        throw ConfigError("--jobs must be at least 1");
    autoencoder.validate();
    latent.validate();
}

bool SweepResult::failed() const
{
    for (const auto& r : rows)
        if (r.status != "ok")
            return true;
    for (const auto& r : delta_table)
        if (r.status != "ok")
            return true;
    return false;
}

std::vector<ExperimentResult> SweepResult::summarize(bool by_known) const
{
    std::map<std::pair<std::string, std::size_t>, ExperimentResult> cells;
    for (const auto& r : rows) {
        if (!r.accuracy)
            continue;
        const std::size_t size = by_known ? r.known : r.authorized;
        auto& e = cells[{r.method, size}];
        e.method = r.method;
        e.size = size;
        if (r.arm == "aug") {
            e.accuracy_aug_per_seed.push_back(*r.accuracy);
            e.seeds.push_back(r.seed);
            e.gen_seconds += r.gen_seconds;
        } else {
            e.accuracy_nonaug_per_seed.push_back(*r.accuracy);
        }
        e.train_seconds += r.train_seconds;
    }
    std::vector<ExperimentResult> out;
    const auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v)
            s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    for (auto& [key, e] : cells) {
        e.accuracy_aug = mean(e.accuracy_aug_per_seed);
        e.accuracy_nonaug = mean(e.accuracy_nonaug_per_seed);
        out.push_back(std::move(e));
    }
    return out;
}

SweepResult run_supervised_sweep(const Corpus& corpus, const SupervisedConfig& cfg)
{
    cfg.validate();
    const std::size_t population = corpus.tx_ids().size();
    const std::size_t needed = cfg.authorized + max_of(cfg.known_sizes) + cfg.test_outliers;
    if (population < needed)
        throw ConfigError("population too small: the supervised sweep needs " + std::to_string(needed) +
                          " transmitters (|A| + max |K| + |O|), the corpus has " + std::to_string(population));

    struct Cell {
        std::size_t k;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (auto k : cfg.known_sizes)
        for (auto s : cfg.seeds)
            cells.push_back({k, s});
    std::vector<std::vector<Row>> rows(cells.size());
    std::vector<json> infos(cells.size());
    run_cells(cells.size(), cfg.jobs, [&](std::size_t i) {
        rows[i] = supervised_cell(corpus, cfg, cells[i].k, cells[i].seed, infos[i]);
    });

    SweepResult res;
    for (auto& r : rows)
        res.rows.insert(res.rows.end(), r.begin(), r.end());
    std::stable_sort(res.rows.begin(), res.rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.method, a.known, a.seed) < std::tie(b.method, b.known, b.seed);
    });
    res.manifest = {{"sweep", "supervised"},
                    {"config", config::to_json(cfg)},
                    {"population", population},
                    {"cells", cells_json(infos)}};
    return res;
}

SweepResult run_blind_sweep(const Corpus& corpus, const BlindConfig& cfg)
{
    cfg.validate();
    const std::size_t population = corpus.tx_ids().size();
    const std::size_t tune_a = *std::min_element(cfg.authorized_sizes.begin(), cfg.authorized_sizes.end());
    const bool ellipsoid = std::count(cfg.methods.begin(), cfg.methods.end(), Method::ellipsoid) > 0;
    const bool tuning = ellipsoid && !cfg.delta;
    std::size_t needed = cfg.test_outliers + max_of(cfg.authorized_sizes);
    if (tuning)
        needed = std::max(needed, cfg.test_outliers + tune_a + cfg.tuning_outliers);
    if (population < needed)
        throw ConfigError("population too small: the blind sweep needs " + std::to_string(needed) +
                          " transmitters, the corpus has " + std::to_string(population));

    SweepResult res;
    Tuning tuned;
    if (tuning) {
        tuned = tune_delta(corpus, cfg, tune_a, cfg.seeds.front());
        res.delta_table = tuned.table;
    } else if (ellipsoid) {
        tuned.delta = cfg.delta;
    }
    res.tuned_delta = tuned.delta;

    struct Cell {
        std::size_t a;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (auto a : cfg.authorized_sizes)
        for (auto s : cfg.seeds)
            cells.push_back({a, s});
    std::vector<std::vector<Row>> rows(cells.size());
    std::vector<json> infos(cells.size());
    run_cells(cells.size(), cfg.jobs, [&](std::size_t i) {
        rows[i] = blind_cell(corpus, cfg, cells[i].a, cells[i].seed, tuned, tune_a, infos[i]);
    });
    for (auto& r : rows)
        res.rows.insert(res.rows.end(), r.begin(), r.end());
    std::stable_sort(res.rows.begin(), res.rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.method, a.authorized, a.seed) < std::tie(b.method, b.authorized, b.seed);
    });

    double ell_s = 0.0, lat_s = 0.0;
    std::size_t paired = 0;
    for (const Row& r : res.rows) {
        if (r.method != "ellipsoid" || r.arm != "aug" || !r.accuracy)
            continue;
        for (const Row& o : res.rows)
            if (o.method == "latent_opt" && o.arm == "aug" && o.accuracy && o.authorized == r.authorized &&
                o.seed == r.seed) {
                ell_s += r.gen_seconds;
                lat_s += o.gen_seconds;
                ++paired;
            }
    }
    res.manifest = {{"sweep", "blind"},
                    {"config", config::to_json(cfg)},
                    {"population", population},
                    {"tuning_authorized", tune_a},
                    {"tuned_delta", tuned.delta ? json(*tuned.delta) : json(nullptr)},
                    {"cells", cells_json(infos)}};
    if (paired > 0 && ell_s > 0.0)
        res.manifest["gen_seconds_ratio_latent_over_ellipsoid"] = lat_s / ell_s;
    return res;
}

std::string rows_csv(const std::vector<Row>& rows, bool timings)
{
    std::string out = std::string(rows_header) + "\n";
    for (const auto& r : rows) {
        out += r.method + "," + std::to_string(r.authorized) + "," + std::to_string(r.known) + ",";
        out += (r.delta ? fmt(*r.delta) : "") + "," + std::to_string(r.seed) + "," + r.arm + ",";
        out += (r.accuracy ? fmt(*r.accuracy) : "") + ",";
        out += (timings ? fmt(r.train_seconds) : "") + "," + (timings ? fmt(r.gen_seconds) : "") + ",";
        out += r.status + "\n";
    }
    return out;
}

std::string delta_csv(const std::vector<DeltaRow>& rows)
{
    std::string out = std::string(delta_header) + "\n";
    for (const auto& r : rows)
        out += fmt(r.delta) + "," + std::to_string(r.authorized) + "," + std::to_string(r.seed) + "," +
               (r.val_accuracy ? fmt(*r.val_accuracy) : "") + "," + fmt(r.outside_fraction) + "," + r.status + "\n";
    return out;
}

std::vector<Row> parse_rows_csv(const std::string& text)
{
    std::vector<Row> out;
    for (const auto& f : csv_records(text, 10, rows_header)) {
        Row r;
        r.method = f[0];
        r.authorized = static_cast<std::size_t>(std::stoull(f[1]));
        r.known = static_cast<std::size_t>(std::stoull(f[2]));
        r.delta = parse_optional(f[3]);
        r.seed = std::stoull(f[4]);
        r.arm = f[5];
        r.accuracy = parse_optional(f[6]);
        r.train_seconds = parse_optional(f[7]).value_or(0.0);
        r.gen_seconds = parse_optional(f[8]).value_or(0.0);
        r.status = f[9];
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<DeltaRow> parse_delta_csv(const std::string& text)
{
    std::vector<DeltaRow> out;
    for (const auto& f : csv_records(text, 6, delta_header)) {
        DeltaRow r;
        r.delta = std::stod(f[0]);
        r.authorized = static_cast<std::size_t>(std::stoull(f[1]));
        r.seed = std::stoull(f[2]);
        r.val_accuracy = parse_optional(f[3]);
        r.outside_fraction = std::stod(f[4]);
        r.status = f[5];
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace rfaug::sweep
