#pragma once

#include <cstdint>
#include <vector>

#include "eaq/nn.hpp"
#include "eaq/tensor.hpp"

namespace eaq {

/// Residual block: two k-wide convolutions with group norm and SiLU, a
/// per-channel bias projected from the step embedding, and an identity or
/// 1x1-conv skip.
struct ResBlock {
    nn::Conv1d conv1, conv2;
    nn::GroupNorm gn1, gn2;
    nn::Linear time_proj;
    nn::Conv1d skip;  // 1x1, only when in_ch != out_ch
    bool has_skip = false;

    struct Cache {
        Mat x, h1, h2, h4, h5, h6;
        nn::GroupNorm::Cache gn1c, gn2c;
        std::vector<double> t1, tb;
    };

    void init(int in_ch, int out_ch, int kernel, int groups, int emb_dim, Rng& rng);
    void forward(const Mat& x, const std::vector<double>& emb, Mat& y, Cache& c) const;
    void backward(const Cache& c, const std::vector<double>& emb, const Mat& dy, Mat& dx,
                  std::vector<double>& demb);
    void collect(std::vector<nn::ParamRef>& out);
};

struct UNetConfig {
    int in_rows = 0;        // F
    int base_channels = 32; // level widths: C, 2C, 4C
    int groups = 8;
    int emb_dim = 64;
    int kernel = 5;
};

/// x0-predicting temporal U-Net: f_theta(tau_k, k) -> tau0_hat, three
/// resolution levels along the time axis with pooled encoder, nearest
/// upsampling and skip concatenation.
struct TemporalUNet {
    UNetConfig cfg;
    nn::Linear emb_fc1, emb_fc2;
    ResBlock enc1, enc2, mid, dec2, dec1;
    nn::Conv1d up_conv2, up_conv1;  // k=3 after nearest upsample
    nn::Conv1d head;                // 1x1, zero-initialized

    /// Activation caches for one forward/backward pass. Inference from
    /// multiple threads uses one State per thread; parameters are read-only.
    struct State {
        std::vector<double> emb0, e1t, e1s, emb;
        ResBlock::Cache enc1c, enc2c, midc, dec2c, dec1c;
        Mat a1, p1, a2, p2, am, u2, c2, cat2, d2, u1, c1, cat1, d1;
    };

    void init(const UNetConfig& config, std::uint64_t seed);
    void forward(const Mat& x, int k, Mat& out, State& st) const;
    /// Accumulates parameter gradients for the pass cached in `st`.
    void backward(const Mat& dout, State& st);

    std::vector<nn::ParamRef> params();
    std::size_t param_count() const;
    std::vector<double> serialize() const;
    void deserialize(const std::vector<double>& flat);
};

}  // namespace eaq
