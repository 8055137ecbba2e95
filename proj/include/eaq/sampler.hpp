#pragma once

#include <cstdint>
#include <vector>

#include "eaq/checkpoint.hpp"
#include "eaq/episode.hpp"
#include "eaq/schedule.hpp"
#include "eaq/unet.hpp"

namespace eaq {

/// One ancestral DDPM step: predict tau0_hat = f(tau_k, k), clip to
/// [-1, 1], form the fixed-variance posterior and add sqrt(beta_tilde_k)
/// * eps (eps forced to zero at k = 1).
Mat reverse_step(const Mat& tau_k, int k, const TemporalUNet& model, const NoiseSchedule& sched,
                 const Mat& eps, TemporalUNet::State& st);

/// Run `count` independent chains from pure noise down to k = 1.
/// Chains use per-chain derived seeds and may execute in parallel; the
/// result is identical either way. threads = 0 picks the hardware count.
std::vector<Mat> sample_trajectories(const TemporalUNet& model, const ChannelLayout& layout,
                                     const NoiseSchedule& sched, int count, std::uint64_t seed,
                                     int threads = 0);

/// Decode samples into episodes; zero-length decodes are dropped (count
/// reported via dropped). rtg is recomputed from the decoded rewards when
/// recompute_rtg is set; the generated q_tot channel is kept in q_gen as a
/// diagnostic either way.
std::vector<Episode> decode_and_filter(const std::vector<Mat>& samples,
                                       const ChannelLayout& layout,
                                       const NormalizationStats& stats, double gamma,
                                       bool recompute_rtg = true, int* dropped = nullptr);

/// D_aug = D_real + S*|D_real| synthetic episodes, provenance-tagged.
std::vector<Episode> augment(const std::vector<Episode>& real, const Checkpoint& ckpt,
                             const TemporalUNet& model, int scale, std::uint64_t seed,
                             int threads = 0);

}  // namespace eaq
