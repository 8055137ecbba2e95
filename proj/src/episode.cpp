#include "eaq/episode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "eaq/rng.hpp"

namespace eaq {

double Episode::total_reward() const {
    return std::accumulate(rewards.begin(), rewards.end(), 0.0);
}

void Episode::validate(int num_actions) const {
    const std::size_t t = rewards.size();
    if (t == 0) throw std::invalid_argument("episode is empty");
    if (obs.size() != t || actions.size() != t)
        throw std::invalid_argument("episode obs/actions/rewards lengths disagree");
    if (has_rtg() && rtg.size() != t)
        throw std::invalid_argument("episode rtg length disagrees with rewards");
    for (std::size_t i = 0; i < t; ++i) {
        if (static_cast<int>(obs[i].size()) != num_agents ||
            static_cast<int>(actions[i].size()) != num_agents)
            throw std::invalid_argument("episode agent count mismatch at step " + std::to_string(i));
        for (int n = 0; n < num_agents; ++n) {
            if (obs[i][n].size() != obs[0][0].size())
                throw std::invalid_argument("episode obs dim mismatch at step " + std::to_string(i));
            if (actions[i][n] < 0 || actions[i][n] >= num_actions)
                throw std::invalid_argument("action id " + std::to_string(actions[i][n]) +
                                            " out of range at step " + std::to_string(i));
        }
    }
}

ChannelLayout ChannelLayout::make(int num_agents, int obs_dim, int num_actions, int t_max) {
    if (num_agents < 1 || obs_dim < 1 || num_actions < 1 || t_max < 1)
        throw std::invalid_argument("ChannelLayout: all dimensions must be >= 1");
    ChannelLayout layout;
    layout.num_agents = num_agents;
    layout.obs_dim = obs_dim;
    layout.num_actions = num_actions;
    layout.t_max = t_max;
    layout.row_map.reserve(layout.feature_rows());
    for (int n = 0; n < num_agents; ++n) {
        for (int d = 0; d < obs_dim; ++d) layout.row_map.push_back({RowKind::obs, n, d});
        for (int a = 0; a < num_actions; ++a)
            layout.row_map.push_back({RowKind::action_onehot, n, a});
    }
    layout.row_map.push_back({RowKind::reward, -1, -1});
    layout.row_map.push_back({RowKind::q_tot, -1, -1});
    layout.row_map.push_back({RowKind::done, -1, -1});
    return layout;
}

int ChannelLayout::obs_row(int agent, int dim) const {
    return agent * (obs_dim + num_actions) + dim;
}

int ChannelLayout::action_row(int agent, int action) const {
    return agent * (obs_dim + num_actions) + obs_dim + action;
}

bool ChannelLayout::operator==(const ChannelLayout& o) const {
    return num_agents == o.num_agents && obs_dim == o.obs_dim && num_actions == o.num_actions &&
           t_max == o.t_max;
}

Episode compute_reward_to_go(const Episode& episode, double gamma) {
    if (episode.rewards.empty()) throw std::invalid_argument("compute_reward_to_go: empty episode");
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("compute_reward_to_go: gamma must be in (0, 1]");
    Episode out = episode;
    const int t = episode.length();
    out.rtg.assign(t, 0.0);
    out.rtg[t - 1] = episode.rewards[t - 1];
    for (int i = t - 2; i >= 0; --i) out.rtg[i] = episode.rewards[i] + gamma * out.rtg[i + 1];
    return out;
}

namespace {

// Raw-space (F, T_max) matrix for one episode: Eq.-style rows, zero padding
// past the episode's length.
Mat raw_matrix(const Episode& e, const ChannelLayout& layout) {
    Mat m(layout.feature_rows(), layout.t_max);
    const int t_ep = e.length();
    for (int t = 0; t < t_ep; ++t) {
        for (int n = 0; n < layout.num_agents; ++n) {
            for (int d = 0; d < layout.obs_dim; ++d) m.at(layout.obs_row(n, d), t) = e.obs[t][n][d];
            m.at(layout.action_row(n, e.actions[t][n]), t) = 1.0;
        }
        m.at(layout.reward_row(), t) = e.rewards[t];
        m.at(layout.q_tot_row(), t) = e.rtg[t];
    }
    m.at(layout.done_row(), t_ep - 1) = 1.0;
    return m;
}

}  // namespace

TensorizedDataset tensorize(const std::vector<Episode>& episodes, const ChannelLayout& layout) {
    const int f = layout.feature_rows();
    TensorizedDataset ds;
    ds.layout = layout;
    ds.data.reserve(episodes.size());
    ds.episode_lengths.reserve(episodes.size());

    for (std::size_t b = 0; b < episodes.size(); ++b) {
        const Episode& e = episodes[b];
        if (e.num_agents != layout.num_agents || e.obs_dim() != layout.obs_dim)
            throw std::runtime_error("tensorize: episode " + std::to_string(b) +
                                     " does not match the channel layout");
        if (!e.has_rtg())
            throw std::invalid_argument("tensorize: episode " + std::to_string(b) +
                                        " has no reward-to-go; compute it first");
        if (e.length() > layout.t_max)
            throw std::runtime_error("tensorize: episode " + std::to_string(b) + " length " +
                                     std::to_string(e.length()) + " exceeds T_max " +
                                     std::to_string(layout.t_max));
        e.validate(layout.num_actions);
        ds.data.push_back(raw_matrix(e, layout));
        ds.episode_lengths.push_back(e.length());
    }

    // Dataset-wide per-row min/max over the raw matrices (padding included);
    // binary rows are pinned to [0, 1].
    ds.stats.mins.assign(f, 0.0);
    ds.stats.maxs.assign(f, 0.0);
    ds.stats.is_binary.assign(f, 0);
    for (int r = 0; r < f; ++r) {
        const RowKind kind = layout.row_map[r].kind;
        if (kind == RowKind::action_onehot || kind == RowKind::done) {
            ds.stats.is_binary[r] = 1;
            ds.stats.mins[r] = 0.0;
            ds.stats.maxs[r] = 1.0;
            continue;
        }
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const Mat& m : ds.data) {
            for (int t = 0; t < layout.t_max; ++t) {
                lo = std::min(lo, m.at(r, t));
                hi = std::max(hi, m.at(r, t));
            }
        }
        if (ds.data.empty()) lo = hi = 0.0;
        ds.stats.mins[r] = lo;
        ds.stats.maxs[r] = hi;
    }

    for (Mat& m : ds.data)
        for (int r = 0; r < f; ++r)
            for (int t = 0; t < layout.t_max; ++t) m.at(r, t) = ds.stats.normalize(r, m.at(r, t));
    return ds;
}

Episode decode_matrix(const Mat& m, const ChannelLayout& layout, const NormalizationStats& stats) {
    // Episode length: first column whose raw done value crosses 0.5,
    // inclusive; T_max when no column crosses (no-termination fallback).
    const int done_r = layout.done_row();
    int len = layout.t_max;
    for (int t = 0; t < layout.t_max; ++t) {
        if (stats.denormalize(done_r, m.at(done_r, t)) >= 0.5) {
            len = t + 1;
            break;
        }
    }

    Episode e;
    e.num_agents = layout.num_agents;
    e.obs.resize(len);
    e.actions.resize(len);
    e.rewards.resize(len);
    e.rtg.resize(len);
    for (int t = 0; t < len; ++t) {
        e.obs[t].assign(layout.num_agents, std::vector<double>(layout.obs_dim));
        e.actions[t].assign(layout.num_agents, 0);
        for (int n = 0; n < layout.num_agents; ++n) {
            for (int d = 0; d < layout.obs_dim; ++d) {
                const int r = layout.obs_row(n, d);
                e.obs[t][n][d] = stats.denormalize(r, m.at(r, t));
            }
            int best = 0;
            double best_v = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < layout.num_actions; ++a) {
                const double v = m.at(layout.action_row(n, a), t);
                if (v > best_v) {
                    best_v = v;
                    best = a;
                }
            }
            e.actions[t][n] = best;
        }
        e.rewards[t] = stats.denormalize(layout.reward_row(), m.at(layout.reward_row(), t));
        e.rtg[t] = stats.denormalize(layout.q_tot_row(), m.at(layout.q_tot_row(), t));
    }
    return e;
}

Episode detensorize(const TensorizedDataset& ds, int index) {
    if (index < 0 || index >= ds.batch())
        throw std::out_of_range("detensorize: index " + std::to_string(index) + " out of range");
    return decode_matrix(ds.data[index], ds.layout, ds.stats);
}

std::vector<Episode> downsample_dataset(const std::vector<Episode>& episodes, double fraction,
                                        std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("downsample_dataset: fraction must be in (0, 1]");
    const std::size_t b = episodes.size();
    const std::size_t keep =
        std::min(b, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(b))));
    std::vector<std::size_t> idx(b);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng = make_rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<Episode> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) out.push_back(episodes[idx[i]]);
    return out;
}

}  // namespace eaq
