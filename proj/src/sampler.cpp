#include "eaq/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "eaq/kernels.hpp"
#include "eaq/rng.hpp"

namespace eaq {

Mat reverse_step(const Mat& tau_k, int k, const TemporalUNet& model, const NoiseSchedule& sched,
                 const Mat& eps, TemporalUNet::State& st) {
    if (k < 1 || k > sched.k_steps)
        throw std::invalid_argument("reverse_step: step k out of [1, K]");
    const auto& K = kern::active();
    Mat tau0_hat;
    model.forward(tau_k, k, tau0_hat, st);
    K.clamp(tau0_hat.size(), -1.0, 1.0, tau0_hat.data());

    const double abar = sched.alpha_bar(k);
    const double abar_prev = sched.alpha_bar_prev(k);
    const double beta = sched.beta(k);
    const double alpha = sched.alpha(k);
    // DDPM posterior q(tau_{k-1} | tau_k, tau0_hat)
    const double coef0 = std::sqrt(abar_prev) * beta / (1.0 - abar);
    const double coefk = std::sqrt(alpha) * (1.0 - abar_prev) / (1.0 - abar);
    Mat out(tau_k.rows, tau_k.cols);
    K.lincomb(out.size(), coef0, tau0_hat.data(), coefk, tau_k.data(), out.data());
    if (k > 1) {
        const double sigma = std::sqrt(sched.posterior_variance(k));
        K.axpy(out.size(), sigma, eps.data(), out.data());
    }
    return out;
}

namespace {

Mat normal_mat(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat m(rows, cols);
    for (double& v : m.v) v = normal(rng);
    return m;
}

}  // namespace

std::vector<Mat> sample_trajectories(const TemporalUNet& model, const ChannelLayout& layout,
                                     const NoiseSchedule& sched, int count, std::uint64_t seed,
                                     int threads) {
    if (count < 1) throw std::invalid_argument("sample_trajectories: count must be >= 1");
    const int f = layout.feature_rows();
    const int t = layout.t_max;
    std::vector<Mat> out(count);

    auto run_chain = [&](int i, TemporalUNet::State& st) {
        Rng rng = make_rng(derive_seed(seed, "chain", static_cast<std::uint64_t>(i)));
        Mat x = normal_mat(f, t, rng);
        Mat eps;
        for (int k = sched.k_steps; k >= 1; --k) {
            eps = k > 1 ? normal_mat(f, t, rng) : Mat(f, t);
            x = reverse_step(x, k, model, sched, eps, st);
        }
        out[i] = std::move(x);
    };

    int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min(n_threads, count));
    if (n_threads == 1) {
        TemporalUNet::State st;
        for (int i = 0; i < count; ++i) run_chain(i, st);
        return out;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w) {
        pool.emplace_back([&, w] {
            TemporalUNet::State st;
            for (int i = w; i < count; i += n_threads) run_chain(i, st);
        });
    }
    for (std::thread& th : pool) th.join();
    return out;
}

std::vector<Episode> decode_and_filter(const std::vector<Mat>& samples,
                                       const ChannelLayout& layout,
                                       const NormalizationStats& stats, double gamma,
                                       bool recompute_rtg, int* dropped) {
    std::vector<Episode> out;
    out.reserve(samples.size());
    int n_dropped = 0;
    for (const Mat& m : samples) {
        Episode e = decode_matrix(m, layout, stats);
        if (e.length() == 0) {
            ++n_dropped;
            continue;
        }
        e.q_gen = e.rtg;  // generated q_tot channel, kept as a diagnostic
        if (recompute_rtg) e = compute_reward_to_go(e, gamma);
        e.source = "synthetic";
        out.push_back(std::move(e));
    }
    if (dropped) *dropped = n_dropped;
    return out;
}

std::vector<Episode> augment(const std::vector<Episode>& real, const Checkpoint& ckpt,
                             const TemporalUNet& model, int scale, std::uint64_t seed,
                             int threads) {
    if (scale < 1) throw std::invalid_argument("augment: scale must be >= 1");
    const int n_syn = scale * static_cast<int>(real.size());
    std::vector<Episode> out;
    out.reserve(real.size() + n_syn);
    for (const Episode& e : real) {
        out.push_back(e);
        if (out.back().source.empty()) out.back().source = "real";
    }
    if (n_syn == 0) return out;
    const std::vector<Mat> samples =
        sample_trajectories(model, ckpt.layout, ckpt.sched, n_syn, seed, threads);
    std::vector<Episode> syn =
        decode_and_filter(samples, ckpt.layout, ckpt.stats, ckpt.cfg.gamma, true, nullptr);
    for (Episode& e : syn) out.push_back(std::move(e));
    return out;
}

}  // namespace eaq
