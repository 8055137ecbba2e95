#include <fstream>
#include <stdexcept>

#include "eaq/pipeline.hpp"

namespace eaq {

using nlohmann::json;

namespace {

template <class T>
void read_key(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

[[noreturn]] void missing(const std::string& section, const std::string& key) {
    throw std::runtime_error("config: unknown key '" + key + "' in section '" + section + "'");
}

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) ok = true;
        if (!ok) missing(section, item.key());
    }
}

}  // namespace

PipelineConfig config_from_json(const json& j) {
    PipelineConfig cfg;
    check_keys(j, "root",
               {"seed", "scenario", "env", "dataset", "diffusion", "sampler", "rad", "learner",
                "eval"});
    read_key(j, "seed", cfg.seed);
    read_key(j, "scenario", cfg.scenario);
    if (j.contains("env")) {
        const json& e = j.at("env");
        check_keys(e, "env",
                   {"num_allies", "num_enemies", "grid", "enemy_hp", "ally_hp", "t_max",
                    "dmg_reward", "kill_reward", "victory_reward"});
        read_key(e, "num_allies", cfg.env.num_allies);
        read_key(e, "num_enemies", cfg.env.num_enemies);
        read_key(e, "grid", cfg.env.grid);
        read_key(e, "enemy_hp", cfg.env.enemy_hp);
        read_key(e, "ally_hp", cfg.env.ally_hp);
        read_key(e, "t_max", cfg.env.t_max);
        read_key(e, "dmg_reward", cfg.env.dmg_reward);
        read_key(e, "kill_reward", cfg.env.kill_reward);
        read_key(e, "victory_reward", cfg.env.victory_reward);
    }
    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        check_keys(d, "dataset", {"policy", "num_episodes", "fraction", "gamma"});
        read_key(d, "policy", cfg.dataset.policy);
        read_key(d, "num_episodes", cfg.dataset.num_episodes);
        read_key(d, "fraction", cfg.dataset.fraction);
        read_key(d, "gamma", cfg.dataset.gamma);
        if (cfg.dataset.policy != "medium" && cfg.dataset.policy != "poor")
            throw std::runtime_error("config: dataset.policy must be 'medium' or 'poor'");
    }
    if (j.contains("diffusion")) {
        const json& d = j.at("diffusion");
        check_keys(d, "diffusion",
                   {"lambda", "lambda_grid", "batch_size", "lr", "epochs", "k_steps", "beta_start",
                    "beta_end", "base_channels", "groups", "emb_dim", "kernel", "q_raw_space"});
        read_key(d, "lambda", cfg.diffusion.lambda);
        if (d.contains("lambda_grid")) cfg.lambda_grid = d.at("lambda_grid").get<std::vector<double>>();
        read_key(d, "batch_size", cfg.diffusion.batch_size);
        read_key(d, "lr", cfg.diffusion.lr);
        read_key(d, "epochs", cfg.diffusion.epochs);
        read_key(d, "k_steps", cfg.diffusion.k_steps);
        read_key(d, "beta_start", cfg.diffusion.beta_start);
        read_key(d, "beta_end", cfg.diffusion.beta_end);
        read_key(d, "base_channels", cfg.diffusion.base_channels);
        read_key(d, "groups", cfg.diffusion.groups);
        read_key(d, "emb_dim", cfg.diffusion.emb_dim);
        read_key(d, "kernel", cfg.diffusion.kernel);
        read_key(d, "q_raw_space", cfg.diffusion.q_raw_space);
    }
    if (j.contains("sampler")) {
        check_keys(j.at("sampler"), "sampler", {"scale"});
        read_key(j.at("sampler"), "scale", cfg.sampler.scale);
    }
    if (j.contains("rad")) {
        const json& r = j.at("rad");
        check_keys(r, "rad", {"alpha", "beta"});
        read_key(r, "alpha", cfg.rad.alpha);
        read_key(r, "beta", cfg.rad.beta);
    }
    if (j.contains("learner")) {
        const json& l = j.at("learner");
        check_keys(l, "learner",
                   {"algos", "cql_weight", "bcq_threshold", "iterations", "batch_size", "lr",
                    "hidden", "mix_hidden", "target_period"});
        if (l.contains("algos")) cfg.learner_algos = l.at("algos").get<std::vector<std::string>>();
        read_key(l, "cql_weight", cfg.learner.cql_weight);
        read_key(l, "bcq_threshold", cfg.learner.bcq_threshold);
        read_key(l, "iterations", cfg.learner.iterations);
        read_key(l, "batch_size", cfg.learner.batch_size);
        read_key(l, "lr", cfg.learner.lr);
        read_key(l, "hidden", cfg.learner.hidden);
        read_key(l, "mix_hidden", cfg.learner.mix_hidden);
        read_key(l, "target_period", cfg.learner.target_period);
        for (const auto& a : cfg.learner_algos)
            if (a != "cql" && a != "bcq" && a != "none")
                throw std::runtime_error("config: learner.algos entries must be cql|bcq|none");
    }
    if (j.contains("eval")) {
        check_keys(j.at("eval"), "eval", {"episodes"});
        read_key(j.at("eval"), "episodes", cfg.eval.episodes);
    }
    cfg.env.validate();
    cfg.rad.validate();
    cfg.learner.gamma = cfg.dataset.gamma;
    cfg.diffusion.gamma = cfg.dataset.gamma;
    return cfg;
}

json config_to_json(const PipelineConfig& cfg) {
    return json{
        {"seed", cfg.seed},
        {"scenario", cfg.scenario},
        {"env",
         {{"num_allies", cfg.env.num_allies},
          {"num_enemies", cfg.env.num_enemies},
          {"grid", cfg.env.grid},
          {"enemy_hp", cfg.env.enemy_hp},
          {"ally_hp", cfg.env.ally_hp},
          {"t_max", cfg.env.t_max},
          {"dmg_reward", cfg.env.dmg_reward},
          {"kill_reward", cfg.env.kill_reward},
          {"victory_reward", cfg.env.victory_reward}}},
        {"dataset",
         {{"policy", cfg.dataset.policy},
          {"num_episodes", cfg.dataset.num_episodes},
          {"fraction", cfg.dataset.fraction},
          {"gamma", cfg.dataset.gamma}}},
        {"diffusion",
         {{"lambda", cfg.diffusion.lambda},
          {"lambda_grid", cfg.lambda_grid},
          {"batch_size", cfg.diffusion.batch_size},
          {"lr", cfg.diffusion.lr},
          {"epochs", cfg.diffusion.epochs},
          {"k_steps", cfg.diffusion.k_steps},
          {"beta_start", cfg.diffusion.beta_start},
          {"beta_end", cfg.diffusion.beta_end},
          {"base_channels", cfg.diffusion.base_channels},
          {"groups", cfg.diffusion.groups},
          {"emb_dim", cfg.diffusion.emb_dim},
          {"kernel", cfg.diffusion.kernel},
          {"q_raw_space", cfg.diffusion.q_raw_space}}},
        {"sampler", {{"scale", cfg.sampler.scale}}},
        {"rad", {{"alpha", cfg.rad.alpha}, {"beta", cfg.rad.beta}}},
        {"learner",
         {{"algos", cfg.learner_algos},
          {"cql_weight", cfg.learner.cql_weight},
          {"bcq_threshold", cfg.learner.bcq_threshold},
          {"iterations", cfg.learner.iterations},
          {"batch_size", cfg.learner.batch_size},
          {"lr", cfg.learner.lr},
          {"hidden", cfg.learner.hidden},
          {"mix_hidden", cfg.learner.mix_hidden},
          {"target_period", cfg.learner.target_period}}},
        {"eval", {{"episodes", cfg.eval.episodes}}},
    };
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw std::runtime_error("config parse error in " + path + ": " + ex.what());
    }
    return config_from_json(j);
}

namespace {

std::string fnv1a_hex(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

std::string config_hash(const PipelineConfig& cfg) {
    const std::string dump = config_to_json(cfg).dump();
    return fnv1a_hex(dump.data(), dump.size());
}

std::string file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot hash missing file: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace eaq
