#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "eaq/env.hpp"
#include "eaq/checkpoint.hpp"
#include "eaq/episode_io.hpp"
#include "eaq/pipeline.hpp"

using namespace eaq;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<std::string> full = {"eaq"};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : full) argv.push_back(s.data());
    return run_command(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_tiny_config(const fs::path& p) {
    std::ofstream out(p);
    out << R"({
  "seed": 5,
  "scenario": "ff-tiny",
  "env": {"num_allies": 2, "num_enemies": 2, "grid": 4, "enemy_hp": 2, "ally_hp": 2, "t_max": 8},
  "dataset": {"policy": "poor", "num_episodes": 40, "fraction": 0.25, "gamma": 0.99},
  "diffusion": {"lambda": 0.1, "epochs": 4, "batch_size": 4, "k_steps": 6, "beta_end": 0.3,
                 "base_channels": 8, "groups": 4, "emb_dim": 12},
  "sampler": {"scale": 2},
  "learner": {"algos": ["cql"], "iterations": 30, "batch_size": 8, "hidden": 16, "mix_hidden": 8,
               "target_period": 10},
  "eval": {"episodes": 4}
})";
}

}  // namespace

TEST_CASE("config: defaults carry the paper-named hyperparameters") {
    const PipelineConfig cfg;
    CHECK(cfg.sampler.scale == 5);
    CHECK(cfg.dataset.fraction == doctest::Approx(0.03));
    CHECK(cfg.rad.alpha == doctest::Approx(0.8));
    CHECK(cfg.rad.beta == doctest::Approx(1.2));
    CHECK(cfg.diffusion.lambda == doctest::Approx(0.1));
    CHECK(cfg.lambda_grid == std::vector<double>{0.5, 0.1, 0.01});
    CHECK(cfg.diffusion.k_steps == 1000);
    CHECK(cfg.diffusion.beta_start == doctest::Approx(1e-4));
    CHECK(cfg.diffusion.beta_end == doctest::Approx(0.02));
}

TEST_CASE("config: unknown keys are named in the error") {
    try {
        config_from_json({{"diffusion", {{"lamda", 0.2}}}});
        FAIL("expected error");
    } catch (const std::runtime_error& ex) {
        CHECK(std::string(ex.what()).find("lamda") != std::string::npos);
    }
    CHECK_THROWS(config_from_json({{"dataset", {{"policy", "great"}}}}));
}

TEST_CASE("config: hash is stable and sensitive") {
    PipelineConfig a, b;
    CHECK(config_hash(a) == config_hash(b));
    b.diffusion.lambda = 0.5;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("manifest round-trip") {
    TempDir dir("eaq_manifest_test");
    Manifest m;
    m.stage = "demo";
    m.config_hash = "abc";
    m.seed = 42;
    m.inputs["in.jsonl"] = "123";
    m.outputs["out.jsonl"] = "456";
    m.params = {{"x", 1}};
    write_manifest(m, dir.path / "demo.manifest.json");
    const auto back = read_manifest(dir.path / "demo.manifest.json");
    REQUIRE(back.has_value());
    CHECK(back->stage == "demo");
    CHECK(back->inputs == m.inputs);
    CHECK(back->outputs == m.outputs);
    CHECK(back->params == m.params);
    CHECK(!read_manifest(dir.path / "missing.json").has_value());
}

TEST_CASE("policy checkpoint round-trips and acts identically") {
    EnvConfig env;
    env.num_allies = 2;
    env.num_enemies = 2;
    env.grid = 4;
    env.enemy_hp = 2;
    env.ally_hp = 2;
    env.t_max = 8;
    const auto data = generate_offline_dataset(env, PolicyQuality::medium, 10, 0.99, 3);
    LearnerConfig cfg;
    cfg.reg = LearnerConfig::Regularizer::bcq;
    cfg.iterations = 20;
    cfg.batch_size = 8;
    cfg.hidden = 16;
    cfg.mix_hidden = 8;
    cfg.seed = 2;
    const auto run = train_offline(cfg, data, env.num_actions());
    TempDir dir("eaq_policy_test");
    const std::string path = (dir.path / "p.ckpt").string();
    save_policy(run.policy, path);
    const TrainedPolicy back = load_policy(path);
    CHECK(back.num_agents == 2);
    CHECK(back.cfg.reg == LearnerConfig::Regularizer::bcq);
    Rng rng = make_rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        std::vector<double> obs(env.obs_dim());
        for (double& v : obs) v = dist(rng);
        CHECK(back.act(obs, i % 2) == run.policy.act(obs, i % 2));
    }
}

TEST_CASE("cli pipeline: run-all produces artifacts, re-run is a no-op, inputs untouched") {
    TempDir dir("eaq_cli_test");
    const fs::path config = dir.path / "config.json";
    write_tiny_config(config);
    const fs::path out = dir.path / "out";

    REQUIRE(run_cli({"run-all", "--config", config.string(), "--out", out.string(),
                     "--augmenter", "none"}) == 0);
    CHECK(fs::exists(out / "dataset_full.jsonl"));
    CHECK(fs::exists(out / "original.jsonl"));
    CHECK(fs::exists(out / "policy_none-cql.ckpt"));
    CHECK(fs::exists(out / "eval_none-cql.csv"));
    CHECK(fs::exists(out / "eval.csv"));
    CHECK(fs::exists(out / "gen-data.manifest.json"));

    // every artifact recorded in a manifest exists and hashes match
    for (const auto& entry : fs::directory_iterator(out)) {
        if (entry.path().extension() != ".json") continue;
        if (entry.path().filename().string().find("manifest") == std::string::npos) continue;
        const auto m = read_manifest(entry.path());
        REQUIRE(m.has_value());
        for (const auto& [path, hash] : m->outputs) {
            CHECK(fs::exists(path));
            CHECK(file_hash(path) == hash);
        }
    }

    // inputs unchanged by a re-run; stages skip as no-ops
    const std::string before = file_hash(out / "original.jsonl");
    REQUIRE(run_cli({"run-all", "--config", config.string(), "--out", out.string(),
                     "--augmenter", "none"}) == 0);
    CHECK(file_hash(out / "original.jsonl") == before);

    // determinism: a fresh directory yields identical hashes for every
    // artifact any manifest records
    const fs::path out2 = dir.path / "out2";
    REQUIRE(run_cli({"run-all", "--config", config.string(), "--out", out2.string(),
                     "--augmenter", "none"}) == 0);
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(out)) {
        if (entry.path().filename().string().find(".manifest.json") == std::string::npos) continue;
        const auto m1 = read_manifest(entry.path());
        const auto m2 = read_manifest(out2 / entry.path().filename());
        REQUIRE(m1.has_value());
        REQUIRE(m2.has_value());
        REQUIRE(m1->outputs.size() == m2->outputs.size());
        for (auto it1 = m1->outputs.begin(), it2 = m2->outputs.begin(); it1 != m1->outputs.end();
             ++it1, ++it2) {
            CHECK(fs::path(it1->first).filename() == fs::path(it2->first).filename());
            CHECK(it1->second == it2->second);
            ++compared;
        }
    }
    CHECK(compared >= 5);
}

TEST_CASE("cli pipeline: eaq augmenter path end to end (tiny)") {
    TempDir dir("eaq_cli_eaq_test");
    const fs::path config = dir.path / "config.json";
    write_tiny_config(config);
    const fs::path out = dir.path / "out";
    REQUIRE(run_cli({"run-all", "--config", config.string(), "--out", out.string(),
                     "--augmenter", "eaq"}) == 0);
    CHECK(fs::exists(out / "model.ckpt"));
    CHECK(fs::exists(out / "train_log.csv"));
    // the guidance weight used is recorded in the stage manifest
    const auto dm = read_manifest(out / "train-diffusion.manifest.json");
    REQUIRE(dm.has_value());
    CHECK(dm->params.at("lambda").get<double>() == doctest::Approx(0.1));
    CHECK(fs::exists(out / "augmented_eaq.jsonl"));
    const EpisodeFile aug = load_episodes((out / "augmented_eaq.jsonl").string());
    const EpisodeFile orig = load_episodes((out / "original.jsonl").string());
    CHECK(aug.episodes.size() == orig.episodes.size() * 3);  // (1 + S) with S = 2
    int synthetic = 0;
    for (const auto& e : aug.episodes) synthetic += e.source == "synthetic" ? 1 : 0;
    CHECK(synthetic == static_cast<int>(orig.episodes.size()) * 2);
}

TEST_CASE("cli pipeline: eaq-noq ablation trains with zero guidance weight") {
    TempDir dir("eaq_cli_noq_test");
    const fs::path config = dir.path / "config.json";
    write_tiny_config(config);
    const fs::path out = dir.path / "out";
    REQUIRE(run_cli({"run-all", "--config", config.string(), "--out", out.string(),
                     "--augmenter", "eaq-noq"}) == 0);
    CHECK(fs::exists(out / "model-noq.ckpt"));
    CHECK(fs::exists(out / "augmented_eaq_noq.jsonl"));
    const auto dm = read_manifest(out / "train-diffusion-noq.manifest.json");
    REQUIRE(dm.has_value());
    CHECK(dm->params.at("lambda").get<double>() == 0.0);
    const Checkpoint ckpt = load_checkpoint((out / "model-noq.ckpt").string());
    CHECK(ckpt.cfg.lambda == 0.0);
}

TEST_CASE("cli pipeline: sample, rad, and metrics subcommands") {
    TempDir dir("eaq_cli_sub_test");
    const fs::path config = dir.path / "config.json";
    write_tiny_config(config);
    const fs::path out = dir.path / "out";
    REQUIRE(run_cli({"gen-data", "--config", config.string(), "--out", out.string()}) == 0);
    REQUIRE(run_cli({"downsample", "--config", config.string(), "--out", out.string()}) == 0);
    REQUIRE(run_cli({"train-diffusion", "--config", config.string(), "--out", out.string()}) == 0);
    REQUIRE(run_cli({"sample", "--config", config.string(), "--out", out.string(), "--count",
                     "3"}) == 0);
    const EpisodeFile samples = load_episodes((out / "samples.jsonl").string());
    CHECK(samples.episodes.size() == 3);
    for (const auto& e : samples.episodes) CHECK(e.source == "synthetic");

    REQUIRE(run_cli({"rad", "--config", config.string(), "--out", out.string(), "--augmenter",
                     "rad-s"}) == 0);
    const EpisodeFile rads = load_episodes((out / "augmented_rad_s.jsonl").string());
    const EpisodeFile orig = load_episodes((out / "original.jsonl").string());
    CHECK(rads.episodes.size() == orig.episodes.size() * 3);  // 1 + S copies, S = 2
    int tagged = 0;
    for (const auto& e : rads.episodes) tagged += e.source == "rad_s" ? 1 : 0;
    CHECK(tagged == static_cast<int>(orig.episodes.size()) * 2);

    REQUIRE(run_cli({"metrics", "--config", config.string(), "--out", out.string(), "--data",
                     "augmented_rad_s.jsonl", "--reference", "original.jsonl", "--label",
                     "rad-s"}) == 0);
    CHECK(fs::exists(out / "metrics_rad-s.json"));

    REQUIRE(run_cli({"train-marl", "--config", config.string(), "--out", out.string(), "--data",
                     "augmented_rad_s.jsonl", "--algo", "bcq"}) == 0);
    CHECK(fs::exists(out / "policy_bcq.ckpt"));
    REQUIRE(run_cli({"eval", "--config", config.string(), "--out", out.string(), "--policy",
                     "policy_bcq.ckpt", "--data", "augmented_rad_s.jsonl", "--reference",
                     "original.jsonl", "--label", "rad-s-bcq"}) == 0);
    CHECK(fs::exists(out / "eval_rad-s-bcq.csv"));
}

TEST_CASE("cli pipeline: unknown subcommand and lock behavior") {
    TempDir dir("eaq_cli_err_test");
    CHECK(run_cli({"frobnicate"}) != 0);
    // a held lock rejects concurrent invocations
    const fs::path out = dir.path / "out";
    fs::create_directories(out);
    std::ofstream(out / ".eaq.lock") << "held";
    CHECK(run_cli({"gen-data", "--out", out.string()}) != 0);
}
