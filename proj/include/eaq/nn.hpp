#pragma once

#include <cstdint>
#include <vector>

#include "eaq/rng.hpp"
#include "eaq/tensor.hpp"

namespace eaq::nn {

/// View of one parameter block and its gradient, for the optimizer.
struct ParamRef {
    double* w;
    double* g;
    std::size_t n;
};

/// 1-D convolution along time, stride 1, "same" zero padding (odd k).
struct Conv1d {
    int in_ch = 0, out_ch = 0, k = 0;
    std::vector<double> w, b, gw, gb;

    // gain 0 zero-initializes (used for the output head).
    void init(int in_ch, int out_ch, int k, Rng& rng, double gain = 1.0);
    void forward(const Mat& x, Mat& y) const;
    // Accumulates gw/gb; writes dx (overwrite) when non-null.
    void backward(const Mat& x, const Mat& dy, Mat* dx);
    void collect(std::vector<ParamRef>& out);
};

struct Linear {
    int in_dim = 0, out_dim = 0;
    std::vector<double> w, b, gw, gb;

    void init(int in_dim, int out_dim, Rng& rng, double gain = 1.0);
    void forward(const double* x, double* y) const;
    void backward(const double* x, const double* dy, double* dx);
    void collect(std::vector<ParamRef>& out);
};

/// GroupNorm over (channels_per_group x T) blocks of an (C, T) map.
struct GroupNorm {
    int channels = 0, groups = 0;
    double eps = 1e-5;
    std::vector<double> gamma, beta, ggamma, gbeta;

    struct Cache {
        Mat xhat;
        std::vector<double> inv_std;  // per group
    };

    void init(int channels, int groups);
    void forward(const Mat& x, Mat& y, Cache& c) const;
    void backward(const Cache& c, const Mat& dy, Mat& dx);
    void collect(std::vector<ParamRef>& out);
};

// Average pool / nearest upsample by 2 along time. Pooling uses ceil
// semantics (odd tails pool a single column); upsample crops to t_out.
void avgpool2(const Mat& x, Mat& y);
void avgpool2_backward(const Mat& dy, int t_in, Mat& dx);
void upsample2(const Mat& x, int t_out, Mat& y);
void upsample2_backward(const Mat& dy, int t_in, Mat& dx);

void silu_vec(const std::vector<double>& x, std::vector<double>& y);

/// Sinusoidal embedding of a diffusion step index.
void sinusoidal_embedding(double k, int dim, std::vector<double>& out);

struct Adam {
    double lr = 2e-4;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::int64_t step_count = 0;

    void attach(std::vector<ParamRef> params);
    void zero_grad();
    void step();

    std::vector<ParamRef> params_;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace eaq::nn
