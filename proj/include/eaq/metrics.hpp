#pragma once

#include <optional>
#include <vector>

#include "eaq/episode.hpp"

namespace eaq {

/// Focus-fire fraction: over timesteps where every alive agent (>= 2 of
/// them) picks an attack action, the fraction where all attacks target the
/// same enemy. Aliveness is read from the own-HP observation channel.
/// Returns nullopt when no timestep qualifies.
std::optional<double> cooperation_metric(const std::vector<Episode>& dataset, int num_actions);

/// Mean over candidate observation vectors of the Euclidean distance to the
/// nearest reference observation vector. 0 for candidate == reference;
/// grows as the candidate set leaves the reference support.
double coverage_statistic(const std::vector<Episode>& reference,
                          const std::vector<Episode>& candidate);

}  // namespace eaq
