// Stage orchestration and the CLI. Every stage runs under a per-out-dir
// lock, checks its manifest for a no-op re-run, and removes its declared
// outputs if it fails partway.

#include <fcntl.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "eaq/checkpoint.hpp"
#include "eaq/episode_io.hpp"
#include "eaq/kernels.hpp"
#include "eaq/metrics.hpp"
#include "eaq/pipeline.hpp"
#include "eaq/sampler.hpp"

namespace fs = std::filesystem;

namespace eaq {

using nlohmann::json;

namespace {

struct LockFile {
    fs::path path;
    int fd = -1;

    explicit LockFile(const fs::path& dir) : path(dir / ".eaq.lock") {
        fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0)
            throw std::runtime_error("output directory is locked by another invocation: " +
                                     path.string() + " (remove the lock file if stale)");
    }
    ~LockFile() {
        if (fd >= 0) {
            ::close(fd);
            ::unlink(path.c_str());
        }
    }
    LockFile(const LockFile&) = delete;
    LockFile& operator=(const LockFile&) = delete;
};

struct StageIo {
    PipelineConfig cfg;
    fs::path out;
    bool force = false;
};

std::uint64_t stage_seed(const PipelineConfig& cfg, const std::string& stage) {
    return derive_seed(cfg.seed, stage);
}

/// Runs `body` unless an up-to-date manifest says the stage already
/// produced these outputs from these inputs. Returns false on skip.
bool execute_stage(const StageIo& io, const std::string& stage,
                   const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs,
                   const json& params, const std::function<void()>& body) {
    Manifest want;
    want.stage = stage;
    want.config_hash = config_hash(io.cfg);
    want.seed = stage_seed(io.cfg, stage);
    want.params = params;
    for (const fs::path& p : inputs) want.inputs[p.string()] = file_hash(p);

    const fs::path manifest_path = io.out / (stage + ".manifest.json");
    if (!io.force) {
        if (auto have = read_manifest(manifest_path)) {
            const bool key_match = have->stage == want.stage &&
                                   have->config_hash == want.config_hash &&
                                   have->seed == want.seed && have->inputs == want.inputs &&
                                   have->params == want.params;
            bool outputs_ok = key_match;
            if (key_match) {
                for (const auto& [path, hash] : have->outputs) {
                    if (!fs::exists(path) || file_hash(path) != hash) {
                        outputs_ok = false;
                        break;
                    }
                }
            }
            if (outputs_ok) {
                std::cout << "[" << stage << "] up to date, skipping (use --force to re-run)\n";
                return false;
            }
        }
    }

    try {
        body();
    } catch (...) {
        for (const fs::path& p : outputs) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        std::error_code ec;
        fs::remove(manifest_path, ec);
        throw;
    }
    for (const fs::path& p : outputs) want.outputs[p.string()] = file_hash(p);
    write_manifest(want, manifest_path);
    return true;
}

DatasetMeta meta_for_env(const PipelineConfig& cfg) {
    DatasetMeta meta;
    meta.num_agents = cfg.env.num_allies;
    meta.obs_dim = cfg.env.obs_dim();
    meta.num_actions = cfg.env.num_actions();
    meta.t_max = cfg.env.t_max;
    meta.gamma = cfg.dataset.gamma;
    return meta;
}

void stage_gen_data(const StageIo& io, const fs::path& out_file) {
    execute_stage(io, "gen-data", {}, {out_file},
                  {{"policy", io.cfg.dataset.policy},
                   {"num_episodes", io.cfg.dataset.num_episodes}},
                  [&] {
                      const PolicyQuality q = io.cfg.dataset.policy == "medium"
                                                  ? PolicyQuality::medium
                                                  : PolicyQuality::poor;
                      EpisodeFile file;
                      file.meta = meta_for_env(io.cfg);
                      file.episodes = generate_offline_dataset(
                          io.cfg.env, q, io.cfg.dataset.num_episodes, io.cfg.dataset.gamma,
                          stage_seed(io.cfg, "gen-data"));
                      save_episodes(file, out_file.string());
                      std::cout << "[gen-data] wrote " << file.episodes.size() << " episodes to "
                                << out_file << "\n";
                  });
}

void stage_downsample(const StageIo& io, const fs::path& in_file, const fs::path& out_file) {
    execute_stage(io, "downsample", {in_file}, {out_file},
                  {{"fraction", io.cfg.dataset.fraction}}, [&] {
                      EpisodeFile file = load_episodes(in_file.string());
                      file.episodes = downsample_dataset(file.episodes, io.cfg.dataset.fraction,
                                                         stage_seed(io.cfg, "downsample"));
                      save_episodes(file, out_file.string());
                      std::cout << "[downsample] kept " << file.episodes.size() << " episodes ("
                                << io.cfg.dataset.fraction * 100.0 << "%)\n";
                  });
}

void stage_train_diffusion(const StageIo& io, const fs::path& in_file, const fs::path& ckpt_file,
                           const fs::path& log_file, const fs::path& cache_file, double lambda,
                           const std::string& stage_name) {
    execute_stage(
        io, stage_name, {in_file}, {ckpt_file, log_file, cache_file},
        {{"lambda", lambda},
         {"epochs", io.cfg.diffusion.epochs},
         {"k_steps", io.cfg.diffusion.k_steps},
         {"kernels", kern::backend_name(kern::backend())}},
        [&] {
            EpisodeFile file = load_episodes(in_file.string());
            if (file.episodes.empty())
                throw std::runtime_error("train-diffusion: dataset is empty: " + in_file.string());
            for (Episode& e : file.episodes)
                if (!e.has_rtg()) e = compute_reward_to_go(e, file.meta.gamma);
            const TensorizedDataset ds = tensorize(file.episodes, file.meta.layout());
            save_tensor_cache(ds, cache_file.string());
            TrainConfig tc = io.cfg.diffusion;
            tc.lambda = lambda;
            tc.gamma = file.meta.gamma;
            tc.seed = stage_seed(io.cfg, stage_name);
            TrainResult result = train_denoiser(ds, tc);
            write_train_log_csv(result.log, log_file.string());
            save_checkpoint(make_checkpoint(result, tc, ds), ckpt_file.string());
            std::cout << "[" << stage_name << "] final mse=" << result.log.back().mse
                      << " hinge=" << result.log.back().hinge << " (lambda=" << tc.lambda
                      << ")\n";
        });
}

void stage_sample(const StageIo& io, const fs::path& ckpt_file, const fs::path& out_file,
                  int count) {
    execute_stage(io, "sample", {ckpt_file}, {out_file}, {{"count", count}}, [&] {
        const Checkpoint ckpt = load_checkpoint(ckpt_file.string());
        const TemporalUNet model = model_from_checkpoint(ckpt);
        const auto samples = sample_trajectories(model, ckpt.layout, ckpt.sched, count,
                                                 stage_seed(io.cfg, "sample"));
        EpisodeFile file;
        file.meta.num_agents = ckpt.layout.num_agents;
        file.meta.obs_dim = ckpt.layout.obs_dim;
        file.meta.num_actions = ckpt.layout.num_actions;
        file.meta.t_max = ckpt.layout.t_max;
        file.meta.gamma = ckpt.cfg.gamma;
        int dropped = 0;
        file.episodes =
            decode_and_filter(samples, ckpt.layout, ckpt.stats, ckpt.cfg.gamma, true, &dropped);
        save_episodes(file, out_file.string());
        std::cout << "[sample] decoded " << file.episodes.size() << " episodes (" << dropped
                  << " dropped)\n";
    });
}

void stage_augment(const StageIo& io, const fs::path& in_file, const fs::path& ckpt_file,
                   const fs::path& out_file, const std::string& stage_name) {
    execute_stage(
        io, stage_name, {in_file, ckpt_file}, {out_file}, {{"scale", io.cfg.sampler.scale}}, [&] {
            EpisodeFile file = load_episodes(in_file.string());
            const Checkpoint ckpt = load_checkpoint(ckpt_file.string());
            const TemporalUNet model = model_from_checkpoint(ckpt);
            file.episodes = augment(file.episodes, ckpt, model, io.cfg.sampler.scale,
                                    stage_seed(io.cfg, stage_name));
            save_episodes(file, out_file.string());
            std::cout << "[" << stage_name << "] wrote " << file.episodes.size()
                      << " episodes (S=" << io.cfg.sampler.scale << ")\n";
        });
}

void stage_rad(const StageIo& io, const fs::path& in_file, const fs::path& out_file,
               RadConfig::Mode mode, const std::string& stage_name) {
    execute_stage(io, stage_name, {in_file}, {out_file},
                  {{"alpha", io.cfg.rad.alpha},
                   {"beta", io.cfg.rad.beta},
                   {"scale", io.cfg.sampler.scale}},
                  [&] {
                      EpisodeFile file = load_episodes(in_file.string());
                      std::vector<Episode> out = file.episodes;
                      for (Episode& e : out)
                          if (e.source.empty()) e.source = "real";
                      RadConfig rc = io.cfg.rad;
                      rc.mode = mode;
                      // S perturbed copies merged with the original set,
                      // mirroring the diffusion augmentation protocol
                      for (int s = 0; s < io.cfg.sampler.scale; ++s) {
                          rc.seed = derive_seed(stage_seed(io.cfg, stage_name), "copy",
                                                static_cast<std::uint64_t>(s));
                          std::vector<Episode> copy = rad_augment(file.episodes, rc);
                          for (Episode& e : copy) out.push_back(std::move(e));
                      }
                      file.episodes = std::move(out);
                      save_episodes(file, out_file.string());
                      std::cout << "[" << stage_name << "] wrote " << file.episodes.size()
                                << " episodes\n";
                  });
}

LearnerConfig::Regularizer reg_from_name(const std::string& algo) {
    if (algo == "cql") return LearnerConfig::Regularizer::cql;
    if (algo == "bcq") return LearnerConfig::Regularizer::bcq;
    if (algo == "none") return LearnerConfig::Regularizer::none;
    throw std::runtime_error("unknown learner algo: " + algo);
}

void stage_train_marl(const StageIo& io, const fs::path& data_file, const fs::path& policy_file,
                      const std::string& algo, const std::string& stage_name) {
    execute_stage(io, stage_name, {data_file}, {policy_file},
                  {{"algo", algo}, {"iterations", io.cfg.learner.iterations}}, [&] {
                      EpisodeFile file = load_episodes(data_file.string());
                      if (file.episodes.empty())
                          throw std::runtime_error("train-marl: dataset is empty");
                      LearnerConfig lc = io.cfg.learner;
                      lc.reg = reg_from_name(algo);
                      lc.gamma = file.meta.gamma;
                      lc.seed = stage_seed(io.cfg, stage_name);
                      OfflineTrainResult result =
                          train_offline(lc, file.episodes, file.meta.num_actions);
                      save_policy(result.policy, policy_file.string());
                      std::cout << "[" << stage_name
                                << "] final td loss=" << result.log.td_loss.back() << "\n";
                  });
}

void write_eval_csv(const fs::path& path, const std::string& scenario,
                    const std::string& augmentation, std::uint64_t seed, const EvalResult& ev,
                    const std::optional<double>& coop, const std::optional<double>& coverage) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write eval csv: " + path.string());
    out << "scenario,augmentation,seed,mean_return,std,cooperation_fraction,coverage\n";
    out << scenario << ',' << augmentation << ',' << seed << ',' << ev.mean_return << ','
        << ev.std_return << ',';
    if (coop) out << *coop;
    out << ',';
    if (coverage) out << *coverage;
    out << '\n';
}

void stage_eval(const StageIo& io, const fs::path& policy_file, const fs::path& data_file,
                const fs::path& reference_file, const std::string& label,
                const std::string& stage_name, const fs::path& out_file) {
    std::vector<fs::path> inputs = {policy_file, data_file};
    if (!reference_file.empty()) inputs.push_back(reference_file);
    execute_stage(io, stage_name, inputs, {out_file},
                  {{"episodes", io.cfg.eval.episodes}, {"label", label}}, [&] {
                      const TrainedPolicy policy = load_policy(policy_file.string());
                      const EvalResult ev = evaluate(policy, io.cfg.env, io.cfg.eval.episodes,
                                                     stage_seed(io.cfg, stage_name));
                      EpisodeFile data = load_episodes(data_file.string());
                      std::optional<double> coop =
                          cooperation_metric(data.episodes, data.meta.num_actions);
                      std::optional<double> coverage;
                      if (!reference_file.empty()) {
                          EpisodeFile ref = load_episodes(reference_file.string());
                          coverage = coverage_statistic(ref.episodes, data.episodes);
                      }
                      write_eval_csv(out_file, io.cfg.scenario, label, io.cfg.seed, ev, coop,
                                     coverage);
                      std::cout << "[" << stage_name << "] mean_return=" << ev.mean_return
                                << " std=" << ev.std_return << "\n";
                  });
}

void stage_metrics(const StageIo& io, const fs::path& data_file, const fs::path& reference_file,
                   const std::string& label, const fs::path& out_file) {
    std::vector<fs::path> inputs = {data_file};
    if (!reference_file.empty()) inputs.push_back(reference_file);
    execute_stage(io, "metrics-" + label, inputs, {out_file}, {{"label", label}}, [&] {
        EpisodeFile data = load_episodes(data_file.string());
        json j;
        j["label"] = label;
        j["episodes"] = data.episodes.size();
        double mean_return = 0.0, mean_rtg0 = 0.0;
        int synthetic = 0;
        for (const Episode& e : data.episodes) {
            mean_return += e.total_reward() / data.episodes.size();
            if (e.has_rtg()) mean_rtg0 += e.rtg[0] / data.episodes.size();
            if (e.source != "real" && !e.source.empty()) ++synthetic;
        }
        j["mean_return"] = mean_return;
        j["mean_rtg0"] = mean_rtg0;
        j["synthetic_episodes"] = synthetic;
        const auto coop = cooperation_metric(data.episodes, data.meta.num_actions);
        j["cooperation_fraction"] = coop ? json(*coop) : json(nullptr);
        if (!reference_file.empty()) {
            EpisodeFile ref = load_episodes(reference_file.string());
            j["coverage"] = coverage_statistic(ref.episodes, data.episodes);
        }
        std::ofstream out(out_file);
        if (!out) throw std::runtime_error("cannot write metrics: " + out_file.string());
        out << j.dump(2) << '\n';
        std::cout << j.dump(2) << '\n';
    });
}

void merge_eval_rows(const fs::path& out_dir, const std::vector<fs::path>& row_files,
                     const fs::path& merged) {
    std::ofstream out(merged);
    if (!out) throw std::runtime_error("cannot write merged eval csv: " + merged.string());
    out << "scenario,augmentation,seed,mean_return,std,cooperation_fraction,coverage\n";
    for (const fs::path& f : row_files) {
        std::ifstream in(out_dir / f);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line))
            if (!line.empty()) out << line << '\n';
    }
}

void run_all(const StageIo& io, const std::string& augmenter) {
    const fs::path full = io.out / "dataset_full.jsonl";
    const fs::path original = io.out / "original.jsonl";
    stage_gen_data(io, full);
    stage_downsample(io, full, original);

    fs::path train_data = original;
    std::string label = augmenter;
    if (augmenter == "eaq" || augmenter == "eaq-noq") {
        const bool noq = augmenter == "eaq-noq";
        const double lambda = noq ? 0.0 : io.cfg.diffusion.lambda;
        const std::string suffix = noq ? "-noq" : "";
        const fs::path ckpt = io.out / ("model" + suffix + ".ckpt");
        const fs::path log = io.out / ("train_log" + suffix + ".csv");
        const fs::path cache = io.out / ("tensor_cache" + suffix + ".bin");
        stage_train_diffusion(io, original, ckpt, log, cache, lambda,
                              "train-diffusion" + suffix);
        train_data = io.out / ("augmented_" + (noq ? std::string("eaq_noq") : std::string("eaq")) +
                               ".jsonl");
        stage_augment(io, original, ckpt, train_data, "augment" + suffix);
    } else if (augmenter == "rad-s" || augmenter == "rad-m") {
        const bool multi = augmenter == "rad-m";
        train_data = io.out / (multi ? "augmented_rad_m.jsonl" : "augmented_rad_s.jsonl");
        stage_rad(io, original, train_data,
                  multi ? RadConfig::Mode::multi : RadConfig::Mode::single,
                  multi ? "rad-m" : "rad-s");
    } else if (augmenter != "none") {
        throw std::runtime_error("unknown augmenter: " + augmenter +
                                 " (expected eaq|eaq-noq|rad-s|rad-m|none)");
    }

    std::vector<fs::path> eval_rows;
    for (const std::string& algo : io.cfg.learner_algos) {
        const std::string tag = label + "-" + algo;
        const fs::path policy = io.out / ("policy_" + tag + ".ckpt");
        stage_train_marl(io, train_data, policy, algo, "train-marl-" + tag);
        const fs::path row = fs::path("eval_" + tag + ".csv");
        stage_eval(io, policy, train_data, original, tag, "eval-" + tag, io.out / row);
        eval_rows.push_back(row);
    }
    merge_eval_rows(io.out, eval_rows, io.out / "eval.csv");
    stage_metrics(io, train_data, original, label, io.out / ("metrics_" + label + ".json"));
    std::cout << "[run-all] complete; merged report at " << (io.out / "eval.csv") << "\n";
}

}  // namespace

int run_command(int argc, char** argv) {
    CLI::App app{"EAQ: Q-total-guided diffusion augmentation for offline multi-agent RL"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir = "out";
    bool force = false;
    std::int64_t seed_override = -1;
    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed_override, "root seed override");
    app.add_flag("--force", force, "re-run stages even when manifests are up to date");

    // subcommand-specific knobs
    std::string in_file, data_file, ckpt_file, policy_file, reference_file, out_file;
    std::string policy_name, augmenter = "none", algo, label = "dataset";
    double lambda_override = -1.0, fraction_override = -1.0;
    int scale_override = -1, count = 100;

    auto* gen = app.add_subcommand("gen-data", "roll out scripted behavior episodes");
    gen->add_option("--policy", policy_name, "behavior quality: medium|poor");
    gen->add_option("--out-file", out_file, "episodes file (default dataset_full.jsonl)");

    auto* down = app.add_subcommand("downsample", "uniform subsample of an episode file");
    down->add_option("--in", in_file, "input episodes (default dataset_full.jsonl)");
    down->add_option("--fraction", fraction_override, "keep fraction (default from config)");
    down->add_option("--out-file", out_file, "output episodes (default original.jsonl)");

    auto* traind = app.add_subcommand("train-diffusion", "train the guided denoiser");
    traind->add_option("--in", in_file, "training episodes (default original.jsonl)");
    traind->add_option("--lambda", lambda_override, "guidance weight (default from config)");

    auto* sample = app.add_subcommand("sample", "draw synthetic episodes from a checkpoint");
    sample->add_option("--ckpt", ckpt_file, "model checkpoint (default model.ckpt)");
    sample->add_option("--count", count, "number of samples");
    sample->add_option("--out-file", out_file, "output episodes (default samples.jsonl)");

    auto* aug = app.add_subcommand("augment", "D_aug = D_real + S x |D_real| synthetic");
    aug->add_option("--in", in_file, "real episodes (default original.jsonl)");
    aug->add_option("--ckpt", ckpt_file, "model checkpoint (default model.ckpt)");
    aug->add_option("--scale", scale_override, "upsampling scale S (default from config)");
    aug->add_option("--out-file", out_file, "output episodes (default augmented_eaq.jsonl)");

    auto* rad = app.add_subcommand("rad", "random amplitude scaling baseline");
    rad->add_option("--in", in_file, "real episodes (default original.jsonl)");
    rad->add_option("--augmenter", augmenter, "rad-s or rad-m")->required();
    rad->add_option("--scale", scale_override, "copies per real episode (default from config)");
    rad->add_option("--out-file", out_file, "output episodes");

    auto* marl = app.add_subcommand("train-marl", "offline QMIX training");
    marl->add_option("--data", data_file, "training episodes")->required();
    marl->add_option("--algo", algo, "cql|bcq|none")->required();
    marl->add_option("--out-file", out_file, "policy file (default policy_<algo>.ckpt)");

    auto* ev = app.add_subcommand("eval", "greedy evaluation + dataset metrics row");
    ev->add_option("--policy", policy_file, "trained policy")->required();
    ev->add_option("--data", data_file, "training dataset (for cooperation metric)")->required();
    ev->add_option("--reference", reference_file, "reference dataset (for coverage)");
    ev->add_option("--label", label, "augmentation label for the csv row");
    ev->add_option("--out-file", out_file, "csv file (default eval_<label>.csv)");

    auto* met = app.add_subcommand("metrics", "dataset metrics report");
    met->add_option("--data", data_file, "dataset")->required();
    met->add_option("--reference", reference_file, "reference dataset (for coverage)");
    met->add_option("--label", label, "report label");

    auto* all = app.add_subcommand("run-all", "full pipeline for one augmenter");
    all->add_option("--augmenter", augmenter, "eaq|eaq-noq|rad-s|rad-m|none");
    all->add_option("--lambda", lambda_override, "guidance weight override");
    all->add_option("--scale", scale_override, "upsampling scale override");
    all->add_option("--fraction", fraction_override, "downsample fraction override");
    all->add_option("--policy", policy_name, "behavior quality override: medium|poor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        StageIo io;
        io.cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
        io.out = out_dir;
        io.force = force;
        if (seed_override >= 0) io.cfg.seed = static_cast<std::uint64_t>(seed_override);
        if (lambda_override >= 0.0) io.cfg.diffusion.lambda = lambda_override;
        if (scale_override > 0) io.cfg.sampler.scale = scale_override;
        if (fraction_override > 0.0) io.cfg.dataset.fraction = fraction_override;
        if (!policy_name.empty()) {
            if (policy_name != "medium" && policy_name != "poor")
                throw std::runtime_error("--policy must be medium or poor");
            io.cfg.dataset.policy = policy_name;
        }
        fs::create_directories(io.out);
        LockFile lock(io.out);

        if (gen->parsed()) {
            stage_gen_data(io, io.out / (out_file.empty() ? "dataset_full.jsonl" : out_file));
        } else if (down->parsed()) {
            stage_downsample(io, io.out / (in_file.empty() ? "dataset_full.jsonl" : in_file),
                             io.out / (out_file.empty() ? "original.jsonl" : out_file));
        } else if (traind->parsed()) {
            stage_train_diffusion(io, io.out / (in_file.empty() ? "original.jsonl" : in_file),
                                  io.out / "model.ckpt", io.out / "train_log.csv",
                                  io.out / "tensor_cache.bin", io.cfg.diffusion.lambda,
                                  "train-diffusion");
        } else if (sample->parsed()) {
            stage_sample(io, io.out / (ckpt_file.empty() ? "model.ckpt" : ckpt_file),
                         io.out / (out_file.empty() ? "samples.jsonl" : out_file), count);
        } else if (aug->parsed()) {
            stage_augment(io, io.out / (in_file.empty() ? "original.jsonl" : in_file),
                          io.out / (ckpt_file.empty() ? "model.ckpt" : ckpt_file),
                          io.out / (out_file.empty() ? "augmented_eaq.jsonl" : out_file),
                          "augment");
        } else if (rad->parsed()) {
            if (augmenter != "rad-s" && augmenter != "rad-m")
                throw std::runtime_error("rad: --augmenter must be rad-s or rad-m");
            const bool multi = augmenter == "rad-m";
            const std::string def = multi ? "augmented_rad_m.jsonl" : "augmented_rad_s.jsonl";
            stage_rad(io, io.out / (in_file.empty() ? "original.jsonl" : in_file),
                      io.out / (out_file.empty() ? def : out_file),
                      multi ? RadConfig::Mode::multi : RadConfig::Mode::single, augmenter);
        } else if (marl->parsed()) {
            stage_train_marl(io, io.out / data_file,
                             io.out / (out_file.empty() ? "policy_" + algo + ".ckpt" : out_file),
                             algo, "train-marl-" + algo);
        } else if (ev->parsed()) {
            stage_eval(io, io.out / policy_file, io.out / data_file,
                       reference_file.empty() ? fs::path{} : io.out / reference_file, label,
                       "eval-" + label,
                       io.out / (out_file.empty() ? "eval_" + label + ".csv" : out_file));
        } else if (met->parsed()) {
            stage_metrics(io, io.out / data_file,
                          reference_file.empty() ? fs::path{} : io.out / reference_file, label,
                          io.out / ("metrics_" + label + ".json"));
        } else if (all->parsed()) {
            run_all(io, augmenter);
        }
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}

}  // namespace eaq
