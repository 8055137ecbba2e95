#include "eaq/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "eaq/kernels.hpp"

namespace eaq {

void TrainConfig::validate() const {
    if (lambda < 0.0) throw std::invalid_argument("TrainConfig: lambda must be >= 0");
    if (batch_size < 1 || epochs < 1 || k_steps < 1)
        throw std::invalid_argument("TrainConfig: batch_size, epochs, k_steps must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be > 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("TrainConfig: gamma in (0,1]");
}

double q_channel_mean(const Mat& traj, const ChannelLayout& layout, int length) {
    if (length < 1 || length > traj.cols)
        throw std::invalid_argument("q_channel_mean: length out of range");
    return kern::active().sum(static_cast<std::size_t>(length), traj.row(layout.q_tot_row())) /
           static_cast<double>(length);
}

namespace {

// (max-min)/2 of the q row: slope of denormalize, so raw mean = shift + scale * norm mean.
double q_row_scale(const NormalizationStats& stats, int q_row) {
    return 0.5 * (stats.maxs[q_row] - stats.mins[q_row]);
}
double q_row_shift(const NormalizationStats& stats, int q_row) {
    return 0.5 * (stats.maxs[q_row] + stats.mins[q_row]);
}

Mat draw_noise(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat eps(rows, cols);
    for (double& v : eps.v) v = normal(rng);
    return eps;
}

double mse_between(const Mat& a, const Mat& b) {
    const std::size_t n = a.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a.v[i] - b.v[i];
        s += d * d;
    }
    return s / static_cast<double>(n);
}

}  // namespace

LossDiagnostics guided_loss(const TensorizedDataset& minibatch, const PredictFn& model,
                            const NoiseSchedule& sched, double lambda, Rng& rng,
                            bool q_raw_space) {
    const int b = minibatch.batch();
    if (b < 1) throw std::invalid_argument("guided_loss: empty minibatch");
    const ChannelLayout& layout = minibatch.layout;
    const int q_row = layout.q_tot_row();
    const double scale = q_raw_space ? q_row_scale(minibatch.stats, q_row) : 1.0;
    const double shift = q_raw_space ? q_row_shift(minibatch.stats, q_row) : 0.0;

    double q_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < b; ++i)
        q_max = std::max(q_max, shift + scale * q_channel_mean(minibatch.data[i], layout,
                                                               minibatch.episode_lengths[i]));

    std::uniform_int_distribution<int> step_dist(1, sched.k_steps);
    LossDiagnostics diag;
    diag.q_max_batch = q_max;
    Mat tau0_hat;
    for (int i = 0; i < b; ++i) {
        const Mat& tau0 = minibatch.data[i];
        const int k = step_dist(rng);
        const Mat eps = draw_noise(tau0.rows, tau0.cols, rng);
        const Mat tau_k = forward_noise(tau0, k, eps, sched);
        model(tau_k, k, tau0_hat);
        const double mse = mse_between(tau0, tau0_hat);
        const double q_gen =
            shift + scale * q_channel_mean(tau0_hat, layout, minibatch.episode_lengths[i]);
        diag.mse += mse / b;
        diag.hinge += lambda * std::max(0.0, q_max - q_gen) / b;
        diag.q_gen_mean += q_gen / b;
    }
    diag.loss = diag.mse + diag.hinge;
    return diag;
}

void guided_loss_grad(const Mat& tau0, const Mat& tau0_hat, int q_row, int valid_len,
                      double q_max_batch, double q_gen, double lambda, int batch_size,
                      double q_scale, Mat& grad) {
    const std::size_t n = tau0.size();
    grad = Mat(tau0.rows, tau0.cols);
    const double mse_coef = 2.0 / (static_cast<double>(n) * batch_size);
    kern::active().lincomb(n, mse_coef, tau0_hat.data(), -mse_coef, tau0.data(), grad.data());
    // hinge: -lambda/(B * len) * q_scale on the q row's valid columns when active
    if (lambda > 0.0 && q_gen < q_max_batch) {
        const double coef = -lambda * q_scale / (static_cast<double>(valid_len) * batch_size);
        double* qr = grad.row(q_row);
        for (int t = 0; t < valid_len; ++t) qr[t] += coef;
    }
}

TrainResult train_denoiser(const TensorizedDataset& dataset, const TrainConfig& cfg) {
    cfg.validate();
    const int b_total = dataset.batch();
    if (b_total < 1) throw std::invalid_argument("train_denoiser: empty dataset");
    const ChannelLayout& layout = dataset.layout;
    const int q_row = layout.q_tot_row();
    const double scale = cfg.q_raw_space ? q_row_scale(dataset.stats, q_row) : 1.0;
    const double shift = cfg.q_raw_space ? q_row_shift(dataset.stats, q_row) : 0.0;

    TrainResult res;
    res.sched = make_schedule(cfg.k_steps, cfg.beta_start, cfg.beta_end);
    UNetConfig ucfg;
    ucfg.in_rows = layout.feature_rows();
    ucfg.base_channels = cfg.base_channels;
    ucfg.groups = cfg.groups;
    ucfg.emb_dim = cfg.emb_dim;
    ucfg.kernel = cfg.kernel;
    res.model.init(ucfg, derive_seed(cfg.seed, "unet-init"));

    nn::Adam opt;
    opt.lr = cfg.lr;
    opt.attach(res.model.params());

    Rng rng = make_rng(derive_seed(cfg.seed, "train-loop"));
    std::uniform_int_distribution<int> step_dist(1, res.sched.k_steps);
    std::vector<int> order(b_total);
    std::iota(order.begin(), order.end(), 0);

    TemporalUNet::State st;
    Mat tau0_hat, grad;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        TrainLogRow row;
        row.epoch = epoch;
        int batches = 0;
        for (int start = 0; start < b_total; start += cfg.batch_size) {
            const int bsz = std::min(cfg.batch_size, b_total - start);
            double q_max = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < bsz; ++j) {
                const int i = order[start + j];
                q_max = std::max(q_max, shift + scale * q_channel_mean(dataset.data[i], layout,
                                                                       dataset.episode_lengths[i]));
            }
            opt.zero_grad();
            double mse_acc = 0.0, hinge_acc = 0.0, qgen_acc = 0.0;
            for (int j = 0; j < bsz; ++j) {
                const int i = order[start + j];
                const Mat& tau0 = dataset.data[i];
                const int len = dataset.episode_lengths[i];
                const int k = step_dist(rng);
                const Mat eps = draw_noise(tau0.rows, tau0.cols, rng);
                const Mat tau_k = forward_noise(tau0, k, eps, res.sched);
                res.model.forward(tau_k, k, tau0_hat, st);
                const double mse = mse_between(tau0, tau0_hat);
                const double q_gen = shift + scale * q_channel_mean(tau0_hat, layout, len);
                mse_acc += mse / bsz;
                hinge_acc += cfg.lambda * std::max(0.0, q_max - q_gen) / bsz;
                qgen_acc += q_gen / bsz;
                guided_loss_grad(tau0, tau0_hat, q_row, len, q_max, q_gen, cfg.lambda, bsz, scale,
                                 grad);
                res.model.backward(grad, st);
            }
            const double loss = mse_acc + hinge_acc;
            if (!std::isfinite(loss))
                throw std::runtime_error("train_denoiser: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch " +
                                         std::to_string(batches) + " (mse=" +
                                         std::to_string(mse_acc) + ", hinge=" +
                                         std::to_string(hinge_acc) + ")");
            opt.step();
            row.mse += mse_acc;
            row.hinge += hinge_acc;
            row.q_max_batch += q_max;
            row.q_gen_mean += qgen_acc;
            ++batches;
        }
        row.mse /= batches;
        row.hinge /= batches;
        row.q_max_batch /= batches;
        row.q_gen_mean /= batches;
        res.log.push_back(row);
    }
    return res;
}

void write_train_log_csv(const std::vector<TrainLogRow>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write training log: " + path);
    out << "epoch,mse,hinge,q_max_batch,q_gen_mean\n";
    for (const TrainLogRow& r : log)
        out << r.epoch << ',' << r.mse << ',' << r.hinge << ',' << r.q_max_batch << ','
            << r.q_gen_mean << '\n';
}

}  // namespace eaq
