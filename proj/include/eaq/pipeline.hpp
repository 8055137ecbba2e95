#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eaq/diffusion.hpp"
#include "eaq/env.hpp"
#include "eaq/qmix.hpp"
#include "eaq/rad.hpp"

namespace eaq {

/// One experiment's configuration; every paper-named hyperparameter is a
/// named key with its default (lambda grid, S, downsample fraction, RAD
/// bounds).
struct PipelineConfig {
    std::uint64_t seed = 7;
    std::string scenario = "ff-3v3";
    EnvConfig env;
    struct Dataset {
        std::string policy = "poor";  // medium | poor
        int num_episodes = 1000;
        double fraction = 0.03;
        double gamma = 0.99;
    } dataset;
    TrainConfig diffusion;
    std::vector<double> lambda_grid = {0.5, 0.1, 0.01};
    struct Sampler {
        int scale = 5;  // S: synthetic episodes per real episode
    } sampler;
    RadConfig rad;
    LearnerConfig learner;
    std::vector<std::string> learner_algos = {"cql", "bcq"};
    struct Eval {
        int episodes = 64;
    } eval;
};

PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config(const std::string& path);

/// FNV-1a 64 over the canonical JSON dump.
std::string config_hash(const PipelineConfig& cfg);
/// FNV-1a 64 over a file's bytes.
std::string file_hash(const std::filesystem::path& path);

struct Manifest {
    std::string stage;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> inputs;   // path -> content hash
    std::map<std::string, std::string> outputs;  // path -> content hash
    nlohmann::json params;
};

void write_manifest(const Manifest& m, const std::filesystem::path& path);
std::optional<Manifest> read_manifest(const std::filesystem::path& path);

/// Policy checkpoint round-trip for the train-marl / eval stages.
void save_policy(const TrainedPolicy& policy, const std::string& path);
TrainedPolicy load_policy(const std::string& path);

/// CLI entry point (gen-data, downsample, train-diffusion, sample, augment,
/// rad, train-marl, eval, metrics, run-all). Returns the process exit code.
int run_command(int argc, char** argv);

}  // namespace eaq
