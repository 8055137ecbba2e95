#include <doctest.h>

#include <limits>
#include <stdexcept>

#include <algorithm>
#include <cmath>

#include "eaq/diffusion.hpp"
#include "eaq/rng.hpp"

using namespace eaq;

namespace {

Episode random_episode(int t, int n_agents, int d_obs, int n_actions, double rtg0, Rng& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::uniform_int_distribution<int> act(0, n_actions - 1);
    Episode e;
    e.num_agents = n_agents;
    e.obs.resize(t);
    e.actions.resize(t);
    e.rewards.resize(t);
    e.rtg.resize(t);
    for (int i = 0; i < t; ++i) {
        e.obs[i].assign(n_agents, std::vector<double>(d_obs));
        e.actions[i].assign(n_agents, 0);
        for (int n = 0; n < n_agents; ++n) {
            for (int d = 0; d < d_obs; ++d) e.obs[i][n][d] = dist(rng);
            e.actions[i][n] = act(rng);
        }
        e.rewards[i] = dist(rng);
        e.rtg[i] = rtg0 + 0.3 * dist(rng);
    }
    return e;
}

TensorizedDataset tiny_dataset(int b, int t_max, Rng& rng, double rtg_spread = 2.0) {
    const ChannelLayout layout = ChannelLayout::make(1, 2, 3, t_max);
    std::vector<Episode> eps;
    std::uniform_int_distribution<int> len(1, t_max);
    for (int i = 0; i < b; ++i)
        eps.push_back(random_episode(len(rng), 1, 2, 3, rtg_spread * i / std::max(1, b - 1), rng));
    return tensorize(eps, layout);
}

}  // namespace

TEST_CASE("q_channel_mean over valid columns") {
    Rng rng = make_rng(3);
    TensorizedDataset ds = tiny_dataset(1, 6, rng);
    const int q_row = ds.layout.q_tot_row();
    // constant row -> that constant
    for (int t = 0; t < 6; ++t) ds.data[0].at(q_row, t) = 0.37;
    CHECK(q_channel_mean(ds.data[0], ds.layout, 6) == doctest::Approx(0.37));
    // symmetric pair -> 0
    ds.data[0].at(q_row, 0) = 1.0;
    ds.data[0].at(q_row, 1) = -1.0;
    CHECK(q_channel_mean(ds.data[0], ds.layout, 2) == doctest::Approx(0.0));
    // random row vs explicit loop
    Rng r2 = make_rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int t = 0; t < 6; ++t) ds.data[0].at(q_row, t) = dist(r2);
    for (int len = 1; len <= 6; ++len) {
        double want = 0.0;
        for (int t = 0; t < len; ++t) want += ds.data[0].at(q_row, t);
        want /= len;
        CHECK(std::abs(q_channel_mean(ds.data[0], ds.layout, len) - want) <= 1e-12);
    }
    CHECK_THROWS_AS(q_channel_mean(ds.data[0], ds.layout, 0), std::invalid_argument);
    CHECK_THROWS_AS(q_channel_mean(ds.data[0], ds.layout, 7), std::invalid_argument);
}

TEST_CASE("guided loss: hinge contract on constructed batches") {
    Rng rng = make_rng(7);
    const NoiseSchedule sched = make_schedule(5, 0.1, 0.4);
    TensorizedDataset ds = tiny_dataset(1, 4, rng);
    const int q_row = ds.layout.q_tot_row();
    const Mat tau0 = ds.data[0];
    const int len = ds.episode_lengths[0];

    // perfect model on the max-Q sample: hinge 0, mse 0
    PredictFn perfect = [&](const Mat&, int, Mat& out) { out = tau0; };
    Rng lr = make_rng(1);
    LossDiagnostics d = guided_loss(ds, perfect, sched, 0.1, lr);
    CHECK(d.hinge == doctest::Approx(0.0));
    CHECK(d.mse == doctest::Approx(0.0));
    CHECK(d.loss == doctest::Approx(0.0));
    CHECK(d.q_gen_mean == doctest::Approx(d.q_max_batch));

    // Q_gen above Q_max^B: clamped to zero
    PredictFn above = [&](const Mat&, int, Mat& out) {
        out = tau0;
        for (int t = 0; t < len; ++t) out.at(q_row, t) += 0.3;
    };
    lr = make_rng(1);
    d = guided_loss(ds, above, sched, 0.1, lr);
    CHECK(d.hinge == doctest::Approx(0.0));
    CHECK(d.q_gen_mean == doctest::Approx(d.q_max_batch + 0.3));

    // Q_gen = Q_max^B - 0.5 with lambda 0.1: contribution 0.05
    PredictFn below = [&](const Mat&, int, Mat& out) {
        out = tau0;
        for (int t = 0; t < len; ++t) out.at(q_row, t) -= 0.5;
    };
    lr = make_rng(1);
    d = guided_loss(ds, below, sched, 0.1, lr);
    CHECK(d.hinge == doctest::Approx(0.05).epsilon(1e-9));

    // empty batch rejected
    TensorizedDataset empty;
    empty.layout = ds.layout;
    Rng er = make_rng(1);
    CHECK_THROWS_AS(guided_loss(empty, perfect, sched, 0.1, er), std::invalid_argument);
}

TEST_CASE("guided loss gradient matches finite differences") {
    Rng rng = make_rng(11);
    TensorizedDataset ds = tiny_dataset(1, 6, rng);
    const Mat& tau0 = ds.data[0];
    const int q_row = ds.layout.q_tot_row();
    const int len = ds.episode_lengths[0];
    const double q_max = q_channel_mean(tau0, ds.layout, len) + 0.4;  // force an active hinge
    const double lambda = 0.25;

    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Mat yhat(tau0.rows, tau0.cols);
    for (double& v : yhat.v) v = dist(rng);

    // independent loss oracle, one sample (batch 1)
    auto loss_of = [&](const Mat& y) {
        double mse = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double diff = tau0.v[i] - y.v[i];
            mse += diff * diff;
        }
        mse /= static_cast<double>(y.size());
        double qg = 0.0;
        for (int t = 0; t < len; ++t) qg += y.at(q_row, t);
        qg /= len;
        return mse + lambda * std::max(0.0, q_max - qg);
    };

    const double q_gen = q_channel_mean(yhat, ds.layout, len);
    Mat grad;
    guided_loss_grad(tau0, yhat, q_row, len, q_max, q_gen, lambda, 1, 1.0, grad);
    const double h = 1e-6;
    for (std::size_t i = 0; i < yhat.size(); i += 5) {
        const double saved = yhat.v[i];
        yhat.v[i] = saved + h;
        const double hi = loss_of(yhat);
        yhat.v[i] = saved - h;
        const double lo = loss_of(yhat);
        yhat.v[i] = saved;
        const double numeric = (hi - lo) / (2.0 * h);
        CHECK(std::abs(grad.v[i] - numeric) <= 1e-4 * std::max(1.0, std::abs(numeric)));
    }

    // inactive hinge: gradient reduces to the mse part
    const double q_max_low = q_gen - 1.0;
    Mat grad2;
    guided_loss_grad(tau0, yhat, q_row, len, q_max_low, q_gen, lambda, 1, 1.0, grad2);
    for (std::size_t i = 0; i < yhat.size(); ++i)
        CHECK(grad2.v[i] ==
              doctest::Approx(2.0 * (yhat.v[i] - tau0.v[i]) / yhat.size()).epsilon(1e-12));
}

TEST_CASE("hinge argmax is invariant to normalization space") {
    Rng rng = make_rng(13);
    TensorizedDataset ds = tiny_dataset(6, 5, rng, 3.0);
    const int q_row = ds.layout.q_tot_row();
    int argmax_norm = 0, argmax_raw = 0;
    double best_norm = -1e300, best_raw = -1e300;
    for (int i = 0; i < ds.batch(); ++i) {
        const double qn = q_channel_mean(ds.data[i], ds.layout, ds.episode_lengths[i]);
        const double scale = 0.5 * (ds.stats.maxs[q_row] - ds.stats.mins[q_row]);
        const double shift = 0.5 * (ds.stats.maxs[q_row] + ds.stats.mins[q_row]);
        const double qr = shift + scale * qn;
        if (qn > best_norm) {
            best_norm = qn;
            argmax_norm = i;
        }
        if (qr > best_raw) {
            best_raw = qr;
            argmax_raw = i;
        }
    }
    CHECK(argmax_norm == argmax_raw);
}

TEST_CASE("training: loss decreases, log shape, lambda=0 has no hinge") {
    Rng rng = make_rng(17);
    TensorizedDataset ds = tiny_dataset(4, 6, rng);
    TrainConfig cfg;
    cfg.lambda = 0.0;
    cfg.batch_size = 2;
    cfg.epochs = 80;
    cfg.k_steps = 10;
    cfg.beta_end = 0.35;
    cfg.base_channels = 8;
    cfg.groups = 4;
    cfg.emb_dim = 12;
    cfg.lr = 2e-3;
    cfg.seed = 4;
    TrainResult res = train_denoiser(ds, cfg);
    REQUIRE(static_cast<int>(res.log.size()) == cfg.epochs);
    for (const auto& row : res.log) CHECK(row.hinge == 0.0);
    // median of the last decile below median of the first decile
    auto median_of = [&](int lo, int hi) {
        std::vector<double> v;
        for (int i = lo; i < hi; ++i) v.push_back(res.log[i].mse + res.log[i].hinge);
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    const int dec = cfg.epochs / 10;
    CHECK(median_of(cfg.epochs - dec, cfg.epochs) < median_of(0, dec));
}

TEST_CASE("training is deterministic under seed") {
    Rng rng = make_rng(19);
    TensorizedDataset ds = tiny_dataset(3, 5, rng);
    TrainConfig cfg;
    cfg.lambda = 0.1;
    cfg.batch_size = 2;
    cfg.epochs = 6;
    cfg.k_steps = 8;
    cfg.beta_end = 0.3;
    cfg.base_channels = 8;
    cfg.groups = 4;
    cfg.emb_dim = 12;
    cfg.seed = 21;
    const TrainResult a = train_denoiser(ds, cfg);
    const TrainResult b = train_denoiser(ds, cfg);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].mse == b.log[i].mse);
        CHECK(a.log[i].hinge == b.log[i].hinge);
    }
    CHECK(a.model.serialize() == b.model.serialize());
}

TEST_CASE("training aborts on a non-finite loss") {
    Rng rng = make_rng(23);
    TensorizedDataset ds = tiny_dataset(2, 4, rng);
    ds.data[0].v[3] = std::numeric_limits<double>::quiet_NaN();
    TrainConfig cfg;
    cfg.batch_size = 2;
    cfg.epochs = 3;
    cfg.k_steps = 5;
    cfg.beta_end = 0.3;
    cfg.base_channels = 8;
    cfg.groups = 4;
    cfg.emb_dim = 12;
    cfg.seed = 3;
    CHECK_THROWS_AS(train_denoiser(ds, cfg), std::runtime_error);
}
