#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eaq/tensor.hpp"

namespace eaq {

/// One multi-agent episode: per-agent observations and discrete actions,
/// global rewards, and (once computed) the reward-to-go channel.
struct Episode {
    int num_agents = 0;
    // obs[t][n] is agent n's observation vector at step t.
    std::vector<std::vector<std::vector<double>>> obs;
    // actions[t][n] is agent n's discrete action id at step t.
    std::vector<std::vector<int>> actions;
    std::vector<double> rewards;  // global reward per step
    std::vector<double> rtg;      // reward-to-go; empty until computed
    std::string source;           // "real", "synthetic", "rad_s", "rad_m"; may be empty
    std::vector<double> q_gen;    // generated q_tot channel (diagnostic, synthetic episodes)

    int length() const { return static_cast<int>(rewards.size()); }
    int obs_dim() const {
        return (obs.empty() || obs[0].empty()) ? 0 : static_cast<int>(obs[0][0].size());
    }
    bool has_rtg() const { return !rtg.empty(); }

    double total_reward() const;

    /// Throws std::invalid_argument if the per-step containers disagree,
    /// an action id falls outside [0, num_actions), or rtg has the wrong length.
    void validate(int num_actions) const;
};

enum class RowKind : std::uint8_t { obs, action_onehot, reward, q_tot, done };

struct RowRole {
    RowKind kind;
    int agent = -1;  // for obs/action rows
    int index = -1;  // obs dim or action id
};

/// Maps the flat feature rows of the training tensor: for each agent its
/// obs rows then its one-hot action rows, followed by reward, q_tot and
/// done rows. F = N*(d_obs + num_actions) + 3.
struct ChannelLayout {
    int num_agents = 0;
    int obs_dim = 0;
    int num_actions = 0;
    int t_max = 0;
    std::vector<RowRole> row_map;

    static ChannelLayout make(int num_agents, int obs_dim, int num_actions, int t_max);

    int feature_rows() const { return num_agents * (obs_dim + num_actions) + 3; }
    int obs_row(int agent, int dim) const;
    int action_row(int agent, int action) const;
    int reward_row() const { return feature_rows() - 3; }
    int q_tot_row() const { return feature_rows() - 2; }
    int done_row() const { return feature_rows() - 1; }

    bool operator==(const ChannelLayout&) const;
};

/// Per-row min/max used for the affine map to [-1, 1]. Binary rows
/// (one-hot actions, done) are pinned to [0, 1] by construction.
struct NormalizationStats {
    std::vector<double> mins;
    std::vector<double> maxs;
    std::vector<std::uint8_t> is_binary;

    double normalize(int row, double raw) const {
        const double lo = mins[row], hi = maxs[row];
        if (hi <= lo) return 0.0;
        return 2.0 * (raw - lo) / (hi - lo) - 1.0;
    }
    double denormalize(int row, double norm) const {
        const double lo = mins[row], hi = maxs[row];
        if (hi <= lo) return lo;
        return (norm + 1.0) * 0.5 * (hi - lo) + lo;
    }
};

/// The (B, F, T_max) training tensor plus everything needed to decode it.
struct TensorizedDataset {
    std::vector<Mat> data;  // one (F, T_max) matrix per episode, in [-1, 1]
    ChannelLayout layout;
    NormalizationStats stats;
    std::vector<int> episode_lengths;

    int batch() const { return static_cast<int>(data.size()); }
};

/// rtg[t] = sum_{t'>=t} gamma^(t'-t) * rewards[t'], computed by backward
/// recursion. Episode otherwise unchanged.
Episode compute_reward_to_go(const Episode& episode, double gamma);

/// Encode episodes as the Eq.-style (F, T_max) matrices: one-hot actions,
/// reward/q_tot/done rows, raw zero padding past each episode's length,
/// then per-channel min-max normalization to [-1, 1] over the whole dataset.
TensorizedDataset tensorize(const std::vector<Episode>& episodes, const ChannelLayout& layout);

/// Inverse of tensorize for one episode: denormalize, argmax-decode actions,
/// truncate at the first done value >= 0.5 (length T_max if none crosses).
Episode detensorize(const TensorizedDataset& ds, int index);

/// Decode a single normalized (F, T_max) matrix. rtg is filled from the
/// q_tot row.
Episode decode_matrix(const Mat& m, const ChannelLayout& layout, const NormalizationStats& stats);

/// Uniform sample without replacement of ceil(fraction*B) episodes.
std::vector<Episode> downsample_dataset(const std::vector<Episode>& episodes, double fraction,
                                        std::uint64_t seed);

}  // namespace eaq
