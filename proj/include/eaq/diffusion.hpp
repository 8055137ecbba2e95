#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eaq/episode.hpp"
#include "eaq/schedule.hpp"
#include "eaq/unet.hpp"

namespace eaq {

struct TrainConfig {
    double lambda = 0.1;  // guidance weight; 0 disables the Q hinge
    int batch_size = 16;
    double lr = 2e-4;
    int epochs = 100;
    double gamma = 0.99;  // rtg discount carried through to decoding
    int k_steps = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    std::uint64_t seed = 0;
    int base_channels = 32;
    int groups = 8;
    int emb_dim = 64;
    int kernel = 5;
    // Hinge space for Q_max^B / Q_gen. The maximizing sample is the same
    // either way (the per-channel map is affine increasing); only the
    // hinge magnitude changes.
    bool q_raw_space = false;

    void validate() const;
};

/// Mean of the q_tot row over columns [0, length), normalized space.
double q_channel_mean(const Mat& traj, const ChannelLayout& layout, int length);

struct LossDiagnostics {
    double loss = 0.0;
    double mse = 0.0;          // mean over batch of per-element squared error
    double hinge = 0.0;        // lambda-weighted hinge contribution
    double q_max_batch = 0.0;  // max over the minibatch of q_channel_mean(tau0)
    double q_gen_mean = 0.0;   // mean over the minibatch of q_channel_mean(tau0_hat)
};

using PredictFn = std::function<void(const Mat& tau_k, int k, Mat& out)>;

/// One guided-loss evaluation over a minibatch: per sample draw
/// k ~ U{1..K} and eps ~ N(0, I), noise, predict tau0_hat, and score
/// mse + lambda * max(0, Q_max^B - Q_gen).
LossDiagnostics guided_loss(const TensorizedDataset& minibatch, const PredictFn& model,
                            const NoiseSchedule& sched, double lambda, Rng& rng,
                            bool q_raw_space = false);

/// Analytic d(loss)/d(tau0_hat) for one sample's contribution to the
/// batch-mean loss. q_scale converts the normalized q-row mean into hinge
/// space (1 for normalized, (max-min)/2 of the q row for raw).
void guided_loss_grad(const Mat& tau0, const Mat& tau0_hat, int q_row, int valid_len,
                      double q_max_batch, double q_gen, double lambda, int batch_size,
                      double q_scale, Mat& grad);

struct TrainLogRow {
    int epoch = 0;
    double mse = 0.0;
    double hinge = 0.0;
    double q_max_batch = 0.0;
    double q_gen_mean = 0.0;
};

struct TrainResult {
    TemporalUNet model;
    NoiseSchedule sched;
    std::vector<TrainLogRow> log;
};

/// Algorithm-style training loop: shuffled minibatches, per-sample step and
/// noise draws, Adam on the guided loss. Throws on non-finite loss.
TrainResult train_denoiser(const TensorizedDataset& dataset, const TrainConfig& cfg);

void write_train_log_csv(const std::vector<TrainLogRow>& log, const std::string& path);

}  // namespace eaq
