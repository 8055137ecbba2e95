#pragma once

#include <string>

#include "eaq/diffusion.hpp"

namespace eaq {

/// Everything needed to sample without the original dataset: trained
/// parameters plus the config, channel layout, normalization stats and
/// noise schedule they were trained under.
struct Checkpoint {
    TrainConfig cfg;
    ChannelLayout layout;
    NormalizationStats stats;
    NoiseSchedule sched;
    std::vector<double> params;
};

Checkpoint make_checkpoint(const TrainResult& result, const TrainConfig& cfg,
                           const TensorizedDataset& dataset);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Rebuild the denoiser from a checkpoint.
TemporalUNet model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace eaq
