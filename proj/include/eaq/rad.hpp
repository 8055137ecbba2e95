#pragma once

#include <cstdint>
#include <vector>

#include "eaq/episode.hpp"

namespace eaq {

/// Random amplitude scaling over observation features: s' = s * z with
/// z ~ U[alpha, beta]. Mode single draws one z per (agent, timestep);
/// mode multi draws one per observation dimension.
struct RadConfig {
    double alpha = 0.8;
    double beta = 1.2;
    enum class Mode { single, multi } mode = Mode::single;
    std::uint64_t seed = 0;

    void validate() const;
};

std::vector<Episode> rad_augment(const std::vector<Episode>& episodes, const RadConfig& config);

}  // namespace eaq
