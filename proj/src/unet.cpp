#include "eaq/unet.hpp"

#include <cassert>
#include <cstring>
#include <stdexcept>

#include "eaq/kernels.hpp"

namespace eaq {

namespace {

// dst rows [r0, r0+src.rows) = src
void copy_rows(const Mat& src, Mat& dst, int r0) {
    assert(src.cols == dst.cols && r0 + src.rows <= dst.rows);
    std::memcpy(dst.row(r0), src.data(), src.size() * sizeof(double));
}

Mat slice_rows(const Mat& src, int r0, int nrows) {
    Mat out(nrows, src.cols);
    std::memcpy(out.data(), src.row(r0), out.size() * sizeof(double));
    return out;
}

}  // namespace

void ResBlock::init(int in_ch, int out_ch, int kernel, int groups, int emb_dim, Rng& rng) {
    conv1.init(in_ch, out_ch, kernel, rng);
    conv2.init(out_ch, out_ch, kernel, rng);
    gn1.init(out_ch, groups);
    gn2.init(out_ch, groups);
    time_proj.init(emb_dim, out_ch, rng);
    has_skip = in_ch != out_ch;
    if (has_skip) skip.init(in_ch, out_ch, 1, rng);
}

void ResBlock::forward(const Mat& x, const std::vector<double>& emb, Mat& y, Cache& c) const {
    const auto& K = kern::active();
    c.x = x;
    conv1.forward(x, c.h1);
    gn1.forward(c.h1, c.h2, c.gn1c);
    c.h4.ensure(c.h2.rows, c.h2.cols);
    K.silu(c.h2.size(), c.h2.data(), c.h4.data());
    // broadcast time bias per channel
    c.t1.resize(emb.size());
    K.silu(emb.size(), emb.data(), c.t1.data());
    c.tb.assign(conv1.out_ch, 0.0);
    time_proj.forward(c.t1.data(), c.tb.data());
    for (int ch = 0; ch < c.h4.rows; ++ch) {
        double* r = c.h4.row(ch);
        const double bias = c.tb[ch];
        for (int i = 0; i < c.h4.cols; ++i) r[i] += bias;
    }
    conv2.forward(c.h4, c.h5);
    gn2.forward(c.h5, c.h6, c.gn2c);
    y.ensure(c.h6.rows, c.h6.cols);
    K.silu(c.h6.size(), c.h6.data(), y.data());
    if (has_skip) {
        Mat sk;
        skip.forward(x, sk);
        K.axpy(y.size(), 1.0, sk.data(), y.data());
    } else {
        K.axpy(y.size(), 1.0, x.data(), y.data());
    }
}

void ResBlock::backward(const Cache& c, const std::vector<double>& emb, const Mat& dy, Mat& dx,
                        std::vector<double>& demb) {
    const auto& K = kern::active();
    // main branch
    Mat dh6;
    dh6.ensure(dy.rows, dy.cols);
    K.silu_grad(c.h6.size(), c.h6.data(), dy.data(), dh6.data());
    Mat dh5;
    gn2.backward(c.gn2c, dh6, dh5);
    Mat dh4;
    conv2.backward(c.h4, dh5, &dh4);
    // time bias: gradient sums over time per channel
    std::vector<double> dtb(conv1.out_ch, 0.0);
    for (int ch = 0; ch < dh4.rows; ++ch) dtb[ch] = K.sum(dh4.cols, dh4.row(ch));
    std::vector<double> dt1(time_proj.in_dim, 0.0);
    time_proj.backward(c.t1.data(), dtb.data(), dt1.data());
    std::vector<double> demb_local(emb.size(), 0.0);
    K.silu_grad(emb.size(), emb.data(), dt1.data(), demb_local.data());
    K.axpy(demb.size(), 1.0, demb_local.data(), demb.data());
    // dh4 doubles as dh3 (the broadcast add is identity wrt the map input)
    Mat dh2;
    dh2.ensure(dh4.rows, dh4.cols);
    K.silu_grad(c.h2.size(), c.h2.data(), dh4.data(), dh2.data());
    Mat dh1;
    gn1.backward(c.gn1c, dh2, dh1);
    conv1.backward(c.x, dh1, &dx);
    // skip branch
    if (has_skip) {
        Mat dsk;
        skip.backward(c.x, dy, &dsk);
        K.axpy(dx.size(), 1.0, dsk.data(), dx.data());
    } else {
        K.axpy(dx.size(), 1.0, dy.data(), dx.data());
    }
}

void ResBlock::collect(std::vector<nn::ParamRef>& out) {
    conv1.collect(out);
    conv2.collect(out);
    gn1.collect(out);
    gn2.collect(out);
    time_proj.collect(out);
    if (has_skip) skip.collect(out);
}

void TemporalUNet::init(const UNetConfig& config, std::uint64_t seed) {
    cfg = config;
    if (cfg.base_channels % cfg.groups != 0)
        throw std::invalid_argument("TemporalUNet: base_channels must be divisible by groups");
    if (cfg.emb_dim % 2 != 0) throw std::invalid_argument("TemporalUNet: emb_dim must be even");
    Rng rng = make_rng(seed);
    const int c1 = cfg.base_channels;
    const int c2 = 2 * c1;
    const int c4 = 4 * c1;
    emb_fc1.init(cfg.emb_dim, cfg.emb_dim, rng);
    emb_fc2.init(cfg.emb_dim, cfg.emb_dim, rng);
    enc1.init(cfg.in_rows, c1, cfg.kernel, cfg.groups, cfg.emb_dim, rng);
    enc2.init(c1, c2, cfg.kernel, cfg.groups, cfg.emb_dim, rng);
    mid.init(c2, c4, cfg.kernel, cfg.groups, cfg.emb_dim, rng);
    up_conv2.init(c4, c2, 3, rng);
    dec2.init(c4, c2, cfg.kernel, cfg.groups, cfg.emb_dim, rng);
    up_conv1.init(c2, c1, 3, rng);
    dec1.init(c2, c1, cfg.kernel, cfg.groups, cfg.emb_dim, rng);
    head.init(c1, cfg.in_rows, 1, rng, /*gain=*/0.0);
}

void TemporalUNet::forward(const Mat& x, int k, Mat& out, State& st) const {
    assert(x.rows == cfg.in_rows);
    const auto& K = kern::active();
    nn::sinusoidal_embedding(static_cast<double>(k), cfg.emb_dim, st.emb0);
    st.e1t.assign(cfg.emb_dim, 0.0);
    emb_fc1.forward(st.emb0.data(), st.e1t.data());
    st.e1s.resize(cfg.emb_dim);
    K.silu(st.e1t.size(), st.e1t.data(), st.e1s.data());
    st.emb.assign(cfg.emb_dim, 0.0);
    emb_fc2.forward(st.e1s.data(), st.emb.data());

    enc1.forward(x, st.emb, st.a1, st.enc1c);
    nn::avgpool2(st.a1, st.p1);
    enc2.forward(st.p1, st.emb, st.a2, st.enc2c);
    nn::avgpool2(st.a2, st.p2);
    mid.forward(st.p2, st.emb, st.am, st.midc);

    nn::upsample2(st.am, st.a2.cols, st.u2);
    up_conv2.forward(st.u2, st.c2);
    st.cat2.ensure(st.c2.rows + st.a2.rows, st.c2.cols);
    copy_rows(st.c2, st.cat2, 0);
    copy_rows(st.a2, st.cat2, st.c2.rows);
    dec2.forward(st.cat2, st.emb, st.d2, st.dec2c);

    nn::upsample2(st.d2, st.a1.cols, st.u1);
    up_conv1.forward(st.u1, st.c1);
    st.cat1.ensure(st.c1.rows + st.a1.rows, st.c1.cols);
    copy_rows(st.c1, st.cat1, 0);
    copy_rows(st.a1, st.cat1, st.c1.rows);
    dec1.forward(st.cat1, st.emb, st.d1, st.dec1c);

    head.forward(st.d1, out);
}

void TemporalUNet::backward(const Mat& dout, State& st) {
    const auto& K = kern::active();
    std::vector<double> demb(cfg.emb_dim, 0.0);

    Mat dd1;
    head.backward(st.d1, dout, &dd1);
    Mat dcat1;
    dec1.backward(st.dec1c, st.emb, dd1, dcat1, demb);
    Mat dc1 = slice_rows(dcat1, 0, st.c1.rows);
    Mat da1 = slice_rows(dcat1, st.c1.rows, st.a1.rows);
    Mat du1;
    up_conv1.backward(st.u1, dc1, &du1);
    Mat dd2;
    nn::upsample2_backward(du1, st.d2.cols, dd2);
    Mat dcat2;
    dec2.backward(st.dec2c, st.emb, dd2, dcat2, demb);
    Mat dc2 = slice_rows(dcat2, 0, st.c2.rows);
    Mat da2 = slice_rows(dcat2, st.c2.rows, st.a2.rows);
    Mat du2;
    up_conv2.backward(st.u2, dc2, &du2);
    Mat dam;
    nn::upsample2_backward(du2, st.am.cols, dam);
    Mat dp2;
    mid.backward(st.midc, st.emb, dam, dp2, demb);
    Mat da2_pool;
    nn::avgpool2_backward(dp2, st.a2.cols, da2_pool);
    K.axpy(da2.size(), 1.0, da2_pool.data(), da2.data());
    Mat dp1;
    enc2.backward(st.enc2c, st.emb, da2, dp1, demb);
    Mat da1_pool;
    nn::avgpool2_backward(dp1, st.a1.cols, da1_pool);
    K.axpy(da1.size(), 1.0, da1_pool.data(), da1.data());
    Mat dx_unused;
    enc1.backward(st.enc1c, st.emb, da1, dx_unused, demb);

    // embedding trunk
    std::vector<double> de1s(cfg.emb_dim, 0.0);
    emb_fc2.backward(st.e1s.data(), demb.data(), de1s.data());
    std::vector<double> de1t(cfg.emb_dim, 0.0);
    K.silu_grad(st.e1t.size(), st.e1t.data(), de1s.data(), de1t.data());
    emb_fc1.backward(st.emb0.data(), de1t.data(), nullptr);
}

std::vector<nn::ParamRef> TemporalUNet::params() {
    std::vector<nn::ParamRef> out;
    emb_fc1.collect(out);
    emb_fc2.collect(out);
    enc1.collect(out);
    enc2.collect(out);
    mid.collect(out);
    up_conv2.collect(out);
    dec2.collect(out);
    up_conv1.collect(out);
    dec1.collect(out);
    head.collect(out);
    return out;
}

std::size_t TemporalUNet::param_count() const {
    std::size_t n = 0;
    for (const auto& p : const_cast<TemporalUNet*>(this)->params()) n += p.n;
    return n;
}

std::vector<double> TemporalUNet::serialize() const {
    std::vector<double> flat;
    for (const auto& p : const_cast<TemporalUNet*>(this)->params())
        flat.insert(flat.end(), p.w, p.w + p.n);
    return flat;
}

void TemporalUNet::deserialize(const std::vector<double>& flat) {
    std::size_t off = 0;
    for (const auto& p : params()) {
        if (off + p.n > flat.size()) throw std::runtime_error("UNet deserialize: size mismatch");
        std::memcpy(p.w, flat.data() + off, p.n * sizeof(double));
        off += p.n;
    }
    if (off != flat.size()) throw std::runtime_error("UNet deserialize: size mismatch");
}

}  // namespace eaq
