#include "eaq/qmix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "eaq/kernels.hpp"

namespace eaq {

void Mlp::init(const std::vector<int>& dims, Rng& rng) {
    if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least in/out dims");
    layers.resize(dims.size() - 1);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) layers[i].init(dims[i], dims[i + 1], rng);
}

void Mlp::forward(const double* x, std::vector<double>& out, Cache& c) const {
    const auto& K = kern::active();
    const std::size_t n_hidden = layers.size() - 1;
    c.pre.resize(n_hidden);
    c.post.resize(n_hidden);
    const double* cur = x;
    for (std::size_t i = 0; i < n_hidden; ++i) {
        c.pre[i].assign(layers[i].out_dim, 0.0);
        layers[i].forward(cur, c.pre[i].data());
        c.post[i].resize(layers[i].out_dim);
        K.relu(c.pre[i].size(), c.pre[i].data(), c.post[i].data());
        cur = c.post[i].data();
    }
    out.assign(layers.back().out_dim, 0.0);
    layers.back().forward(cur, out.data());
}

void Mlp::backward(const Cache& c, const double* x, const std::vector<double>& dout, double* dx) {
    const auto& K = kern::active();
    std::vector<double> grad = dout;
    for (std::size_t li = layers.size(); li-- > 0;) {
        const double* input = li == 0 ? x : c.post[li - 1].data();
        if (li == 0) {
            layers[0].backward(input, grad.data(), dx);
            break;
        }
        std::vector<double> dpost(layers[li].in_dim, 0.0);
        layers[li].backward(input, grad.data(), dpost.data());
        std::vector<double> dpre(dpost.size());
        K.relu_grad(dpost.size(), c.pre[li - 1].data(), dpost.data(), dpre.data());
        grad = std::move(dpre);
    }
}

void Mlp::collect(std::vector<nn::ParamRef>& out) {
    for (auto& l : layers) l.collect(out);
}

void Mixer::init(int n_agents_, int state_dim_, int mix_hidden_, Rng& rng) {
    n_agents = n_agents_;
    state_dim = state_dim_;
    mix_hidden = mix_hidden_;
    hyper_w1.init(state_dim, mix_hidden * n_agents, rng);
    hyper_b1.init(state_dim, mix_hidden, rng);
    hyper_w2.init(state_dim, mix_hidden, rng);
    hyper_b2a.init(state_dim, mix_hidden, rng);
    hyper_b2b.init(mix_hidden, 1, rng);
}

namespace {
inline double elu(double z) { return z > 0.0 ? z : std::exp(z) - 1.0; }
inline double elu_grad(double z) { return z > 0.0 ? 1.0 : std::exp(z); }
}  // namespace

double Mixer::forward(const std::vector<double>& q, const std::vector<double>& state,
                      Cache& c) const {
    const auto& K = kern::active();
    c.q = q;
    c.state = state;
    c.w1_raw.assign(mix_hidden * n_agents, 0.0);
    hyper_w1.forward(state.data(), c.w1_raw.data());
    c.b1.assign(mix_hidden, 0.0);
    hyper_b1.forward(state.data(), c.b1.data());
    c.w2_raw.assign(mix_hidden, 0.0);
    hyper_w2.forward(state.data(), c.w2_raw.data());
    c.b2_pre.assign(mix_hidden, 0.0);
    hyper_b2a.forward(state.data(), c.b2_pre.data());
    c.b2_post.resize(mix_hidden);
    K.relu(c.b2_pre.size(), c.b2_pre.data(), c.b2_post.data());
    std::vector<double> b2_out(1, 0.0);
    hyper_b2b.forward(c.b2_post.data(), b2_out.data());

    c.z.assign(mix_hidden, 0.0);
    c.h.assign(mix_hidden, 0.0);
    double qtot = b2_out[0];
    for (int i = 0; i < mix_hidden; ++i) {
        double z = c.b1[i];
        for (int n = 0; n < n_agents; ++n) z += std::abs(c.w1_raw[i * n_agents + n]) * q[n];
        c.z[i] = z;
        c.h[i] = elu(z);
        qtot += std::abs(c.w2_raw[i]) * c.h[i];
    }
    return qtot;
}

void Mixer::backward(const Cache& c, double dqtot, std::vector<double>& dq) {
    dq.assign(n_agents, 0.0);
    std::vector<double> dw2_raw(mix_hidden), db1(mix_hidden), dw1_raw(mix_hidden * n_agents);
    for (int i = 0; i < mix_hidden; ++i) {
        dw2_raw[i] = dqtot * c.h[i] * (c.w2_raw[i] > 0.0 ? 1.0 : (c.w2_raw[i] < 0.0 ? -1.0 : 0.0));
        const double dh = dqtot * std::abs(c.w2_raw[i]);
        const double dz = dh * elu_grad(c.z[i]);
        db1[i] = dz;
        for (int n = 0; n < n_agents; ++n) {
            const double w_raw = c.w1_raw[i * n_agents + n];
            dq[n] += dz * std::abs(w_raw);
            dw1_raw[i * n_agents + n] =
                dz * c.q[n] * (w_raw > 0.0 ? 1.0 : (w_raw < 0.0 ? -1.0 : 0.0));
        }
    }
    hyper_w1.backward(c.state.data(), dw1_raw.data(), nullptr);
    hyper_b1.backward(c.state.data(), db1.data(), nullptr);
    hyper_w2.backward(c.state.data(), dw2_raw.data(), nullptr);
    // b2 head: dqtot flows through hyper_b2b and the relu
    std::vector<double> db2_out(1, dqtot);
    std::vector<double> db2_post(mix_hidden, 0.0);
    hyper_b2b.backward(c.b2_post.data(), db2_out.data(), db2_post.data());
    std::vector<double> db2_pre(mix_hidden);
    kern::active().relu_grad(mix_hidden, c.b2_pre.data(), db2_post.data(), db2_pre.data());
    hyper_b2a.backward(c.state.data(), db2_pre.data(), nullptr);
}

void Mixer::collect(std::vector<nn::ParamRef>& out) {
    hyper_w1.collect(out);
    hyper_b1.collect(out);
    hyper_w2.collect(out);
    hyper_b2a.collect(out);
    hyper_b2b.collect(out);
}

void LearnerConfig::validate() const {
    if (iterations < 1 || batch_size < 1) throw std::invalid_argument("LearnerConfig: sizes >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("LearnerConfig: lr > 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("LearnerConfig: gamma in (0,1]");
    if (cql_weight < 0.0) throw std::invalid_argument("LearnerConfig: cql_weight >= 0");
    if (reg == Regularizer::bcq && !(bcq_threshold >= 0.0 && bcq_threshold <= 1.0))
        throw std::invalid_argument("LearnerConfig: bcq_threshold in [0,1]");
}

double cql_penalty(const std::vector<double>& q_values, int data_action) {
    if (data_action < 0 || data_action >= static_cast<int>(q_values.size()))
        throw std::invalid_argument("cql_penalty: data_action out of range");
    const double m = *std::max_element(q_values.begin(), q_values.end());
    double s = 0.0;
    for (double q : q_values) s += std::exp(q - m);
    return m + std::log(s) - q_values[data_action];
}

std::vector<std::uint8_t> bcq_admissible(const std::vector<double>& behavior_probs,
                                         double threshold) {
    if (behavior_probs.empty()) throw std::invalid_argument("bcq_admissible: empty probs");
    if (!(threshold >= 0.0 && threshold <= 1.0))
        throw std::invalid_argument("bcq_admissible: threshold outside [0, 1]");
    double sum = 0.0, maxp = 0.0;
    for (double p : behavior_probs) {
        sum += p;
        maxp = std::max(maxp, p);
    }
    if (std::abs(sum - 1.0) > 1e-6 || maxp <= 0.0)
        throw std::invalid_argument("bcq_admissible: probabilities must sum to 1");
    std::vector<std::uint8_t> mask(behavior_probs.size(), 0);
    for (std::size_t a = 0; a < behavior_probs.size(); ++a)
        mask[a] = behavior_probs[a] / maxp >= threshold ? 1 : 0;
    return mask;
}

namespace {

struct Transition {
    int ep = 0, t = 0;
    bool terminal = false;
};

std::vector<double> softmax(const std::vector<double>& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double s = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        s += p[i];
    }
    for (double& v : p) v /= s;
    return p;
}

// obs + one-hot agent id
std::vector<double> agent_input(const std::vector<double>& obs, int agent_id, int num_agents) {
    std::vector<double> in(obs.size() + num_agents, 0.0);
    std::copy(obs.begin(), obs.end(), in.begin());
    in[obs.size() + agent_id] = 1.0;
    return in;
}

std::vector<double> concat_state(const std::vector<std::vector<double>>& obs) {
    std::vector<double> s;
    for (const auto& o : obs) s.insert(s.end(), o.begin(), o.end());
    return s;
}

void copy_params(std::vector<nn::ParamRef>& dst, std::vector<nn::ParamRef>& src) {
    if (dst.size() != src.size()) throw std::logic_error("copy_params: mismatched nets");
    for (std::size_t i = 0; i < dst.size(); ++i)
        std::memcpy(dst[i].w, src[i].w, src[i].n * sizeof(double));
}

}  // namespace

int TrainedPolicy::act(const std::vector<double>& obs, int agent_id) const {
    Mlp::Cache cache;
    std::vector<double> q;
    const std::vector<double> in = agent_input(obs, agent_id, num_agents);
    agent.forward(in.data(), q, cache);
    std::vector<std::uint8_t> mask(num_actions, 1);
    if (cfg.reg == LearnerConfig::Regularizer::bcq) {
        std::vector<double> logits;
        Mlp::Cache bc;
        behavior.forward(in.data(), logits, bc);
        mask = bcq_admissible(softmax(logits), cfg.bcq_threshold);
    }
    int best = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_actions; ++a) {
        if (!mask[a]) continue;
        if (q[a] > best_q) {
            best_q = q[a];
            best = a;
        }
    }
    return best;
}

OfflineTrainResult train_offline(const LearnerConfig& cfg, const std::vector<Episode>& dataset,
                                 int num_actions) {
    cfg.validate();
    if (dataset.empty()) throw std::invalid_argument("train_offline: empty dataset");
    const int num_agents = dataset.front().num_agents;
    const int obs_dim = dataset.front().obs_dim();
    const int in_dim = obs_dim + num_agents;
    const int state_dim = num_agents * obs_dim;
    const bool bcq = cfg.reg == LearnerConfig::Regularizer::bcq;
    const bool cql = cfg.reg == LearnerConfig::Regularizer::cql;

    std::vector<Transition> transitions;
    for (std::size_t e = 0; e < dataset.size(); ++e) {
        const Episode& ep = dataset[e];
        for (int t = 0; t < ep.length(); ++t)
            transitions.push_back({static_cast<int>(e), t, t == ep.length() - 1});
    }
    if (transitions.empty()) throw std::invalid_argument("train_offline: no transitions");

    Rng rng = make_rng(derive_seed(cfg.seed, "offline-init"));
    OfflineTrainResult res;
    res.policy.cfg = cfg;
    res.policy.num_agents = num_agents;
    res.policy.obs_dim = obs_dim;
    res.policy.num_actions = num_actions;
    res.policy.agent.init({in_dim, cfg.hidden, cfg.hidden, num_actions}, rng);
    res.mixer.init(num_agents, state_dim, cfg.mix_hidden, rng);
    if (bcq) res.policy.behavior.init({in_dim, cfg.hidden, num_actions}, rng);

    Mlp target_agent = res.policy.agent;
    Mixer target_mixer = res.mixer;

    std::vector<nn::ParamRef> online_params, target_params;
    res.policy.agent.collect(online_params);
    res.mixer.collect(online_params);
    target_agent.collect(target_params);
    target_mixer.collect(target_params);

    nn::Adam opt;
    opt.lr = cfg.lr;
    opt.attach(online_params);
    nn::Adam opt_b;
    std::vector<nn::ParamRef> behavior_params;
    if (bcq) {
        res.policy.behavior.collect(behavior_params);
        opt_b.lr = cfg.lr;
        opt_b.attach(behavior_params);
    }

    Rng batch_rng = make_rng(derive_seed(cfg.seed, "offline-batches"));
    std::uniform_int_distribution<std::size_t> pick(0, transitions.size() - 1);

    Mlp::Cache acache, bcache, tcache;
    Mixer::Cache mcache, tmcache;
    std::vector<double> qvec, tqvec, logits;

    for (int it = 0; it < cfg.iterations; ++it) {
        opt.zero_grad();
        if (bcq) opt_b.zero_grad();
        double td_loss = 0.0, reg_loss = 0.0;
        const int bsz = cfg.batch_size;
        for (int b = 0; b < bsz; ++b) {
            const Transition& tr = transitions[pick(batch_rng)];
            const Episode& ep = dataset[tr.ep];
            const auto& obs = ep.obs[tr.t];
            const auto& acts = ep.actions[tr.t];

            // TD target from the target nets (no gradient)
            double y = ep.rewards[tr.t];
            if (!tr.terminal) {
                const auto& next_obs = ep.obs[tr.t + 1];
                std::vector<double> tq_chosen(num_agents, 0.0);
                for (int n = 0; n < num_agents; ++n) {
                    const std::vector<double> in = agent_input(next_obs[n], n, num_agents);
                    target_agent.forward(in.data(), tqvec, tcache);
                    std::vector<std::uint8_t> mask(num_actions, 1);
                    if (bcq) {
                        res.policy.behavior.forward(in.data(), logits, bcache);
                        mask = bcq_admissible(softmax(logits), cfg.bcq_threshold);
                    }
                    double best = -std::numeric_limits<double>::infinity();
                    for (int a = 0; a < num_actions; ++a)
                        if (mask[a] && tqvec[a] > best) best = tqvec[a];
                    tq_chosen[n] = best;
                }
                y += cfg.gamma * target_mixer.forward(tq_chosen, concat_state(next_obs), tmcache);
            }

            // online Qtot for the data actions
            std::vector<double> q_chosen(num_agents, 0.0);
            std::vector<Mlp::Cache> agent_caches(num_agents);
            std::vector<std::vector<double>> agent_qs(num_agents);
            std::vector<std::vector<double>> agent_ins(num_agents);
            for (int n = 0; n < num_agents; ++n) {
                agent_ins[n] = agent_input(obs[n], n, num_agents);
                res.policy.agent.forward(agent_ins[n].data(), agent_qs[n], agent_caches[n]);
                q_chosen[n] = agent_qs[n][acts[n]];
            }
            const double qtot = res.mixer.forward(q_chosen, concat_state(obs), mcache);
            const double err = qtot - y;
            td_loss += err * err / bsz;

            std::vector<double> dq_chosen;
            res.mixer.backward(mcache, 2.0 * err / bsz, dq_chosen);
            for (int n = 0; n < num_agents; ++n) {
                std::vector<double> dq(num_actions, 0.0);
                dq[acts[n]] = dq_chosen[n];
                if (cql && cfg.cql_weight > 0.0) {
                    const double coef = cfg.cql_weight / (static_cast<double>(bsz) * num_agents);
                    reg_loss += coef * cql_penalty(agent_qs[n], acts[n]);
                    const std::vector<double> p = softmax(agent_qs[n]);
                    for (int a = 0; a < num_actions; ++a) dq[a] += coef * p[a];
                    dq[acts[n]] -= coef;
                }
                res.policy.agent.backward(agent_caches[n], agent_ins[n].data(), dq, nullptr);

                if (bcq) {
                    // behavior cloning: cross-entropy on the data action
                    res.policy.behavior.forward(agent_ins[n].data(), logits, bcache);
                    const std::vector<double> p = softmax(logits);
                    const double coef = 1.0 / (static_cast<double>(bsz) * num_agents);
                    reg_loss -= coef * std::log(std::max(p[acts[n]], 1e-12));
                    std::vector<double> dlogits(num_actions);
                    for (int a = 0; a < num_actions; ++a)
                        dlogits[a] = coef * (p[a] - (a == acts[n] ? 1.0 : 0.0));
                    res.policy.behavior.backward(bcache, agent_ins[n].data(), dlogits, nullptr);
                }
            }
        }
        if (!std::isfinite(td_loss) || !std::isfinite(reg_loss))
            throw std::runtime_error("train_offline: non-finite loss at iteration " +
                                     std::to_string(it) + " (td=" + std::to_string(td_loss) +
                                     ", reg=" + std::to_string(reg_loss) + ")");
        opt.step();
        if (bcq) opt_b.step();
        res.log.td_loss.push_back(td_loss);
        res.log.reg_loss.push_back(reg_loss);
        if ((it + 1) % cfg.target_period == 0) copy_params(target_params, online_params);
    }
    return res;
}

EvalResult evaluate(const TrainedPolicy& policy, const EnvConfig& env_cfg, int episodes,
                    std::uint64_t seed) {
    if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
    EvalResult res;
    res.returns.reserve(episodes);
    FocusFireEnv env(env_cfg);
    for (int ep = 0; ep < episodes; ++ep) {
        auto obs = env.reset(derive_seed(seed, "eval-episode", static_cast<std::uint64_t>(ep)));
        double total = 0.0;
        while (true) {
            std::vector<int> actions(env_cfg.num_allies, 0);
            for (int n = 0; n < env_cfg.num_allies; ++n)
                actions[n] = env.ally_alive(n) ? policy.act(obs[n], n) : 0;
            auto sr = env.step(actions);
            total += sr.reward;
            obs = std::move(sr.obs);
            if (sr.done) break;
        }
        res.returns.push_back(total);
    }
    double mean = 0.0;
    for (double r : res.returns) mean += r;
    mean /= episodes;
    double var = 0.0;
    for (double r : res.returns) var += (r - mean) * (r - mean);
    res.mean_return = mean;
    res.std_return = episodes > 1 ? std::sqrt(var / (episodes - 1)) : 0.0;
    return res;
}

}  // namespace eaq
