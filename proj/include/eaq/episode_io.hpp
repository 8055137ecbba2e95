#pragma once

#include <string>
#include <vector>

#include "eaq/episode.hpp"

namespace eaq {

/// First-line metadata record of an episode JSONL file.
struct DatasetMeta {
    int num_agents = 0;
    int obs_dim = 0;
    int num_actions = 0;
    int t_max = 0;
    double gamma = 0.99;

    ChannelLayout layout() const {
        return ChannelLayout::make(num_agents, obs_dim, num_actions, t_max);
    }
};

struct EpisodeFile {
    DatasetMeta meta;
    std::vector<Episode> episodes;
};

/// JSON-lines format: first line {"meta": true, ...}, then one object per
/// episode. Empty file loads as an empty list. Malformed records raise a
/// parse error naming the line; cross-episode shape or action-range
/// violations raise a schema error.
EpisodeFile load_episodes(const std::string& path);
void save_episodes(const EpisodeFile& file, const std::string& path);

/// Binary tensor cache with embedded layout and normalization stats.
/// Round-trips bit-exactly.
void save_tensor_cache(const TensorizedDataset& ds, const std::string& path);
TensorizedDataset load_tensor_cache(const std::string& path);

}  // namespace eaq
