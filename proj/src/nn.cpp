#include "eaq/nn.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "eaq/kernels.hpp"

namespace eaq::nn {

namespace {

void uniform_init(std::vector<double>& w, double bound, Rng& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& x : w) x = dist(rng);
}

}  // namespace

void Conv1d::init(int in_ch_, int out_ch_, int k_, Rng& rng, double gain) {
    if (k_ % 2 == 0) throw std::invalid_argument("Conv1d: kernel size must be odd");
    in_ch = in_ch_;
    out_ch = out_ch_;
    k = k_;
    w.assign(static_cast<std::size_t>(out_ch) * in_ch * k, 0.0);
    b.assign(out_ch, 0.0);
    gw.assign(w.size(), 0.0);
    gb.assign(b.size(), 0.0);
    if (gain > 0.0) {
        const double bound = gain / std::sqrt(static_cast<double>(in_ch) * k);
        uniform_init(w, bound, rng);
        uniform_init(b, bound, rng);
    }
}

void Conv1d::forward(const Mat& x, Mat& y) const {
    assert(x.rows == in_ch);
    y.ensure(out_ch, x.cols);
    kern::active().conv1d(in_ch, out_ch, k, x.cols, x.data(), w.data(), b.data(), y.data());
}

void Conv1d::backward(const Mat& x, const Mat& dy, Mat* dx) {
    const auto& K = kern::active();
    K.conv1d_grad_params(in_ch, out_ch, k, x.cols, x.data(), dy.data(), gw.data(), gb.data());
    if (dx) {
        dx->ensure(in_ch, x.cols);
        K.conv1d_grad_input(in_ch, out_ch, k, x.cols, w.data(), dy.data(), dx->data());
    }
}

void Conv1d::collect(std::vector<ParamRef>& out) {
    out.push_back({w.data(), gw.data(), w.size()});
    out.push_back({b.data(), gb.data(), b.size()});
}

void Linear::init(int in_dim_, int out_dim_, Rng& rng, double gain) {
    in_dim = in_dim_;
    out_dim = out_dim_;
    w.assign(static_cast<std::size_t>(out_dim) * in_dim, 0.0);
    b.assign(out_dim, 0.0);
    gw.assign(w.size(), 0.0);
    gb.assign(b.size(), 0.0);
    if (gain > 0.0) {
        const double bound = gain / std::sqrt(static_cast<double>(in_dim));
        uniform_init(w, bound, rng);
        uniform_init(b, bound, rng);
    }
}

void Linear::forward(const double* x, double* y) const {
    kern::active().matvec(out_dim, in_dim, w.data(), x, b.data(), y);
}

void Linear::backward(const double* x, const double* dy, double* dx) {
    const auto& K = kern::active();
    K.ger(out_dim, in_dim, gw.data(), dy, x);
    K.axpy(out_dim, 1.0, dy, gb.data());
    if (dx) K.matvec_t(out_dim, in_dim, w.data(), dy, dx);
}

void Linear::collect(std::vector<ParamRef>& out) {
    out.push_back({w.data(), gw.data(), w.size()});
    out.push_back({b.data(), gb.data(), b.size()});
}

void GroupNorm::init(int channels_, int groups_) {
    if (channels_ % groups_ != 0)
        throw std::invalid_argument("GroupNorm: channels must be divisible by groups");
    channels = channels_;
    groups = groups_;
    gamma.assign(channels, 1.0);
    beta.assign(channels, 0.0);
    ggamma.assign(channels, 0.0);
    gbeta.assign(channels, 0.0);
}

void GroupNorm::forward(const Mat& x, Mat& y, Cache& c) const {
    assert(x.rows == channels);
    const int t = x.cols;
    const int cpg = channels / groups;
    const std::size_t gn = static_cast<std::size_t>(cpg) * t;
    y.ensure(channels, t);
    c.xhat.ensure(channels, t);
    c.inv_std.assign(groups, 0.0);
    const auto& K = kern::active();
    for (int g = 0; g < groups; ++g) {
        const double* xg = x.row(g * cpg);
        const double mean = K.sum(gn, xg) / static_cast<double>(gn);
        double var = 0.0;
        for (std::size_t i = 0; i < gn; ++i) {
            const double d = xg[i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(gn);
        const double inv_std = 1.0 / std::sqrt(var + eps);
        c.inv_std[g] = inv_std;
        double* xh = c.xhat.row(g * cpg);
        for (std::size_t i = 0; i < gn; ++i) xh[i] = (xg[i] - mean) * inv_std;
        for (int cc = 0; cc < cpg; ++cc) {
            const int ch = g * cpg + cc;
            double* yr = y.row(ch);
            const double* xr = c.xhat.row(ch);
            for (int i = 0; i < t; ++i) yr[i] = gamma[ch] * xr[i] + beta[ch];
        }
    }
}

void GroupNorm::backward(const Cache& c, const Mat& dy, Mat& dx) {
    const int t = dy.cols;
    const int cpg = channels / groups;
    const std::size_t gn = static_cast<std::size_t>(cpg) * t;
    dx.ensure(channels, t);
    const auto& K = kern::active();
    std::vector<double> dxhat(gn);
    for (int g = 0; g < groups; ++g) {
        for (int cc = 0; cc < cpg; ++cc) {
            const int ch = g * cpg + cc;
            ggamma[ch] += K.dot(t, dy.row(ch), c.xhat.row(ch));
            gbeta[ch] += K.sum(t, dy.row(ch));
            const double* dyr = dy.row(ch);
            for (int i = 0; i < t; ++i) dxhat[static_cast<std::size_t>(cc) * t + i] = dyr[i] * gamma[ch];
        }
        const double* xh = c.xhat.row(g * cpg);
        const double mean_dxhat = K.sum(gn, dxhat.data()) / static_cast<double>(gn);
        const double mean_dxhat_xhat = K.dot(gn, dxhat.data(), xh) / static_cast<double>(gn);
        double* dxg = dx.row(g * cpg);
        const double istd = c.inv_std[g];
        for (std::size_t i = 0; i < gn; ++i)
            dxg[i] = istd * (dxhat[i] - mean_dxhat - xh[i] * mean_dxhat_xhat);
    }
}

void GroupNorm::collect(std::vector<ParamRef>& out) {
    out.push_back({gamma.data(), ggamma.data(), gamma.size()});
    out.push_back({beta.data(), gbeta.data(), beta.size()});
}

void avgpool2(const Mat& x, Mat& y) {
    const int t_out = (x.cols + 1) / 2;
    y.ensure(x.rows, t_out);
    for (int c = 0; c < x.rows; ++c) {
        const double* xr = x.row(c);
        double* yr = y.row(c);
        for (int i = 0; i < t_out; ++i) {
            const int a = 2 * i;
            if (a + 1 < x.cols)
                yr[i] = 0.5 * (xr[a] + xr[a + 1]);
            else
                yr[i] = xr[a];
        }
    }
}

void avgpool2_backward(const Mat& dy, int t_in, Mat& dx) {
    dx = Mat(dy.rows, t_in);
    for (int c = 0; c < dy.rows; ++c) {
        const double* gr = dy.row(c);
        double* dxr = dx.row(c);
        for (int i = 0; i < dy.cols; ++i) {
            const int a = 2 * i;
            if (a + 1 < t_in) {
                dxr[a] += 0.5 * gr[i];
                dxr[a + 1] += 0.5 * gr[i];
            } else {
                dxr[a] += gr[i];
            }
        }
    }
}

void upsample2(const Mat& x, int t_out, Mat& y) {
    assert(t_out <= 2 * x.cols);
    y.ensure(x.rows, t_out);
    for (int c = 0; c < x.rows; ++c) {
        const double* xr = x.row(c);
        double* yr = y.row(c);
        for (int i = 0; i < t_out; ++i) yr[i] = xr[i / 2];
    }
}

void upsample2_backward(const Mat& dy, int t_in, Mat& dx) {
    dx = Mat(dy.rows, t_in);
    for (int c = 0; c < dy.rows; ++c) {
        const double* gr = dy.row(c);
        double* dxr = dx.row(c);
        for (int i = 0; i < dy.cols; ++i) dxr[i / 2] += gr[i];
    }
}

void silu_vec(const std::vector<double>& x, std::vector<double>& y) {
    y.resize(x.size());
    kern::active().silu(x.size(), x.data(), y.data());
}

void sinusoidal_embedding(double k, int dim, std::vector<double>& out) {
    assert(dim % 2 == 0);
    const int half = dim / 2;
    out.assign(dim, 0.0);
    for (int i = 0; i < half; ++i) {
        const double freq =
            std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half - 1));
        out[i] = std::sin(k * freq);
        out[half + i] = std::cos(k * freq);
    }
}

void Adam::attach(std::vector<ParamRef> params) {
    params_ = std::move(params);
    m_.clear();
    v_.clear();
    for (const ParamRef& p : params_) {
        m_.emplace_back(p.n, 0.0);
        v_.emplace_back(p.n, 0.0);
    }
    step_count = 0;
}

void Adam::zero_grad() {
    for (const ParamRef& p : params_) kern::active().fill(p.n, 0.0, p.g);
}

void Adam::step() {
    ++step_count;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const ParamRef& p = params_[i];
        kern::active().adam_step(p.n, p.w, p.g, m_[i].data(), v_[i].data(), lr, beta1, beta2, eps,
                                 bc1, bc2);
    }
}

}  // namespace eaq::nn
