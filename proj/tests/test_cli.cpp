#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string output;
};

// Runs the CLI with stdout and stderr captured.
Run rfaug(const std::string& args)
{
    static int counter = 0;
    const fs::path log = fs::temp_directory_path() / ("rfaug_cli_" + std::to_string(counter++) + ".log");
    const std::string cmd = std::string(RFAUG_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream is(log);
    r.output.assign(std::istreambuf_iterator<char>(is), {});
    fs::remove(log);
    return r;
}

std::string bytes(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

json manifest_of(const fs::path& corpus)
{
    return json::parse(bytes(corpus.string() + ".json")).at("manifest");
}

struct Workdir {
    fs::path dir;
    explicit Workdir(const char* name) : dir(fs::temp_directory_path() / name)
    {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Workdir() { fs::remove_all(dir); }
    std::string operator/(const char* f) const { return (dir / f).string(); }
};

} // namespace

TEST_CASE("cli simulate is deterministic and reports bad populations")
{
    Workdir w("rfaug_cli_sim");
    const auto a = rfaug("--seed 7 simulate --tx 3 -o " + (w / "a.orff"));
    REQUIRE(a.code == 0);
    CHECK(a.output.find("tx_id count") != std::string::npos);
    REQUIRE(rfaug("--seed 7 simulate --tx 3 -o " + (w / "b.orff")).code == 0);
    CHECK(bytes(w / "a.orff") == bytes(w / "b.orff"));
    CHECK(bytes(w / "a.orff.json") == bytes(w / "b.orff.json"));
    const auto m = manifest_of(w / "a.orff");
    CHECK(m.at("packets_min") == 100);
    CHECK(m.at("packets_max") == 300);

    const auto empty = rfaug("simulate --tx 0 -o " + (w / "c.orff"));
    CHECK(empty.code == 2);
    CHECK(empty.output.find("empty population") != std::string::npos);
    CHECK(rfaug("simulate --no-such-flag").code == 2);
    CHECK(rfaug("").code == 2);
}

TEST_CASE("cli config file is overridden by flags")
{
    Workdir w("rfaug_cli_cfg");
    {
        std::ofstream os(w / "cfg.json");
        os << R"({"seed": 5, "corpus": {"packets_min": 20, "packets_max": 25}})";
    }
    REQUIRE(rfaug("--config " + (w / "cfg.json") + " --seed 9 simulate --tx 2 --packets-max 30 -o " +
                  (w / "c.orff"))
                .code == 0);
    const auto m = manifest_of(w / "c.orff");
    CHECK(m.at("seed") == 9);
    CHECK(m.at("packets_min") == 20);
    CHECK(m.at("packets_max") == 30);
    {
        std::ofstream os(w / "bad.json");
        os << R"({"corpus": {"packet_min": 20}})";
    }
    const auto bad = rfaug("--config " + (w / "bad.json") + " simulate --tx 2 -o " + (w / "d.orff"));
    CHECK(bad.code == 2);
    CHECK(bad.output.find("unknown config key") != std::string::npos);
}

TEST_CASE("cli generation methods and their manifests")
{
    Workdir w("rfaug_cli_gen");
    const std::string out = " --out-dir " + w.dir.string() + " ";
    REQUIRE(rfaug(out + "simulate --tx 7 --packets-min 40 --packets-max 50").code == 0);
    const std::string corpus = w / "corpus.orff";

    REQUIRE(rfaug(out + "train-gen --corpus " + corpus + " --method cvae --ids 2-6 --epochs 1").code == 0);
    REQUIRE(rfaug(out + "generate --method cvae --model " + (w / "model-cvae") + " --count 7500").code == 0);
    const auto cvae = manifest_of(w / "outliers-cvae.orff");
    CHECK(cvae.at("per_class_counts") == json::array({1500, 1500, 1500, 1500, 1500}));
    CHECK(cvae.at("count") == 7500);

    // A cvae model cannot serve the blind methods, nor the vae method.
    CHECK(rfaug(out + "generate --method vae --model " + (w / "model-cvae")).code == 2);

    REQUIRE(rfaug(out + "train-gen --corpus " + corpus + " --method ae --ids 0,1 --epochs 1").code == 0);
    const std::string ae = " --model " + (w / "model-ae") + " --corpus " + corpus + " --authorized 0,1 ";
    const auto no_delta = rfaug(out + "generate --method ellipsoid" + ae);
    CHECK(no_delta.code == 2);
    CHECK(no_delta.output.find("--delta") != std::string::npos);
    CHECK(rfaug(out + "generate --method ellipsoid --delta 0.3 --count 40" + ae).code == 0);
    CHECK(manifest_of(w / "outliers-ellipsoid.orff").at("delta") == 0.3);
    CHECK(rfaug(out + "generate --method latent-opt --model " + (w / "model-ae") + " --count 10").code == 2);

    REQUIRE(rfaug(out + "generate --method latent-opt --outer-iters 1 --inner-steps 2 --count 12" + ae).code == 0);
    const auto lat = manifest_of(w / "outliers-latent_opt.orff");
    CHECK(lat.at("N") == 1);
    CHECK(lat.at("method") == "latent_opt");
    CHECK(lat.at("retrains") == 0);

    const auto ev = rfaug(out + "evaluate --corpus " + corpus + " --authorized 0,1 --known 2 --test-outliers 3 " +
                          "--epochs 1 --augment " + (w / "outliers-ellipsoid.orff"));
    CHECK(ev.code == 0);
    const auto result = json::parse(bytes(w.dir / "evaluate.json"));
    CHECK(result.at("augmentation") == 40);
    CHECK(result.at("accuracy").get<double>() >= 0.0);
}

TEST_CASE("cli sweep reruns are byte-identical and failures keep the csv")
{
    Workdir w("rfaug_cli_sweep");
    REQUIRE(rfaug("--seed 3 simulate --tx 6 --packets-min 40 --packets-max 50 -o " + (w / "c.orff")).code == 0);
    const std::string args = " sweep --corpus " + (w / "c.orff") +
                             " --methods cvae,ellipsoid --seeds 1 --authorized 2 --known-sizes 2 --test-outliers 2"
                             " --authorized-sizes 2 --tuning-outliers 1 --delta-grid 0.1,0.4 --count 20"
                             " --epochs 1 --gen-epochs 1";
    REQUIRE(rfaug("--out-dir " + (w / "a") + args).code == 0);
    REQUIRE(rfaug("--out-dir " + (w / "b") + " --jobs 2" + args).code == 0);
    for (const char* f : {"supervised.csv", "blind.csv", "blind_delta.csv"})
        CHECK(bytes(w.dir / "a" / f) == bytes(w.dir / "b" / f));
    const std::string csv = bytes(w.dir / "a" / "supervised.csv");
    CHECK(csv.rfind("method,|A|,|K|,delta,seed,arm,accuracy,train_seconds,gen_seconds,status\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(fs::exists(w.dir / "a" / "supervised_accuracy_vs_K_cvae.svg"));
    CHECK(fs::exists(w.dir / "a" / "blind_delta_sweep.svg"));
    const auto manifest = json::parse(bytes(w.dir / "a" / "supervised_manifest.json"));
    CHECK(manifest.at("cells").size() == 1);
    CHECK(manifest.at("cells")[0].contains("split_hash"));

    // Two generated samples cannot cover two classes: the augmented arm fails.
    const auto failed = rfaug("--out-dir " + (w / "f") + " sweep --corpus " + (w / "c.orff") +
                              " --methods cvae --seeds 1 --authorized 2 --known-sizes 2 --test-outliers 2"
                              " --count 1 --epochs 1 --gen-epochs 1");
    CHECK(failed.code == 3);
    const std::string partial = bytes(w.dir / "f" / "supervised.csv");
    CHECK(partial.find(",nonaug,") != std::string::npos);
    CHECK(partial.find("failed: ") != std::string::npos);

    const auto small = rfaug("--out-dir " + (w / "g") + " sweep --corpus " + (w / "c.orff") +
                             " --methods vae --authorized 4 --known-sizes 2 --test-outliers 2");
    CHECK(small.code == 2);
    CHECK(small.output.find("population too small") != std::string::npos);

    const auto rep = rfaug("--out-dir " + (w / "r") + " report --input " + (w / "a"));
    CHECK(rep.code == 0);
    CHECK(fs::exists(w.dir / "r" / "summary.txt"));
    CHECK(rfaug("--out-dir " + (w / "r") + " report --input " + (w / "nothing")).code == 2);
}
