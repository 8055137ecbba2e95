#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eaq/env.hpp"
#include "eaq/nn.hpp"

namespace eaq {

/// Small fully connected net with ReLU between layers, none after the last.
struct Mlp {
    std::vector<nn::Linear> layers;

    struct Cache {
        std::vector<std::vector<double>> pre;   // pre-activations per hidden layer
        std::vector<std::vector<double>> post;  // activations (inputs to next layer)
    };

    void init(const std::vector<int>& dims, Rng& rng);
    void forward(const double* x, std::vector<double>& out, Cache& c) const;
    void backward(const Cache& c, const double* x, const std::vector<double>& dout, double* dx);
    void collect(std::vector<nn::ParamRef>& out);
    int in_dim() const { return layers.front().in_dim; }
    int out_dim() const { return layers.back().out_dim; }
};

/// QMIX monotonic mixer: agent utilities are combined through a single
/// hidden layer whose weights are absolute values of hypernetwork outputs
/// conditioned on the concatenated observations, so dQtot/dQagent >= 0.
struct Mixer {
    int n_agents = 0, mix_hidden = 0, state_dim = 0;
    nn::Linear hyper_w1, hyper_b1, hyper_w2, hyper_b2a, hyper_b2b;

    struct Cache {
        std::vector<double> state, w1_raw, b1, w2_raw, z, h, b2_pre, b2_post, q;
    };

    void init(int n_agents, int state_dim, int mix_hidden, Rng& rng);
    double forward(const std::vector<double>& q, const std::vector<double>& state, Cache& c) const;
    /// Writes dL/dq (agent utility grads) and accumulates hypernet grads.
    void backward(const Cache& c, double dqtot, std::vector<double>& dq);
    void collect(std::vector<nn::ParamRef>& out);
};

struct LearnerConfig {
    enum class Regularizer { none, cql, bcq };
    Regularizer reg = Regularizer::cql;
    double cql_weight = 1.0;
    double bcq_threshold = 0.3;
    int iterations = 3000;
    int batch_size = 64;
    double lr = 5e-4;
    double gamma = 0.99;
    int hidden = 64;
    int mix_hidden = 32;
    int target_period = 200;
    std::uint64_t seed = 0;

    void validate() const;
};

/// logsumexp(q) - q[data_action]; always >= 0.
double cql_penalty(const std::vector<double>& q_values, int data_action);

/// Admissible actions under discrete BCQ: prob[a] / max prob >= threshold.
/// The behavior argmax is always admissible. Throws on degenerate
/// (non-normalized) probability vectors.
std::vector<std::uint8_t> bcq_admissible(const std::vector<double>& behavior_probs,
                                         double threshold);

/// Greedy decentralized policy extracted from offline training.
struct TrainedPolicy {
    LearnerConfig cfg;
    int num_agents = 0, obs_dim = 0, num_actions = 0;
    Mlp agent;     // shared across agents, agent id one-hot appended to obs
    Mlp behavior;  // BCQ behavior classifier (empty unless reg == bcq)

    int act(const std::vector<double>& obs, int agent_id) const;
};

struct OfflineTrainLog {
    std::vector<double> td_loss;  // per iteration
    std::vector<double> reg_loss;
};

struct OfflineTrainResult {
    TrainedPolicy policy;
    Mixer mixer;  // exposed for monotonicity checks
    OfflineTrainLog log;
};

/// TD training of Qtot against r + gamma * max-admissible target Qtot,
/// plus the configured offline regularizer. Deterministic under seed.
OfflineTrainResult train_offline(const LearnerConfig& cfg, const std::vector<Episode>& dataset,
                                 int num_actions);

struct EvalResult {
    double mean_return = 0.0;
    double std_return = 0.0;
    std::vector<double> returns;
};

EvalResult evaluate(const TrainedPolicy& policy, const EnvConfig& env_cfg, int episodes,
                    std::uint64_t seed);

}  // namespace eaq
