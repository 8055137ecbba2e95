// Scalar reference kernels. These are the semantic ground truth the SIMD
// variants are equivalence-tested against; keep them obvious.

#include "kernels_impl.hpp"

#include <algorithm>
#include <cmath>

namespace eaq::kern::scalar {

void fill(std::size_t n, double v, double* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] = v;
}

void axpy(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal(std::size_t n, double a, double* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void add(std::size_t n, const double* x, const double* y, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}

void sub(std::size_t n, const double* x, const double* y, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}

void mul(std::size_t n, const double* x, const double* y, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void lincomb(std::size_t n, double a, const double* x, double b, const double* y, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void clamp(std::size_t n, double lo, double hi, double* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lo, hi);
}

double dot(std::size_t n, const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double sum(std::size_t n, const double* x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

double vmax(std::size_t n, const double* x) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

void silu(std::size_t n, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) {
        const double s = 1.0 / (1.0 + std::exp(-x[i]));
        y[i] = x[i] * s;
    }
}

void silu_grad(std::size_t n, const double* x, const double* dy, double* dx) {
    for (std::size_t i = 0; i < n; ++i) {
        const double s = 1.0 / (1.0 + std::exp(-x[i]));
        dx[i] = dy[i] * (s * (1.0 + x[i] * (1.0 - s)));
    }
}

void relu(std::size_t n, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad(std::size_t n, const double* x, const double* dy, double* dx) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void matvec(std::size_t out_dim, std::size_t in_dim, const double* w, const double* x,
            const double* b, double* y) {
    for (std::size_t r = 0; r < out_dim; ++r) {
        const double* wr = w + r * in_dim;
        double s = b ? b[r] : 0.0;
        for (std::size_t c = 0; c < in_dim; ++c) s += wr[c] * x[c];
        y[r] = s;
    }
}

void matvec_t(std::size_t out_dim, std::size_t in_dim, const double* w, const double* dy,
              double* dx) {
    for (std::size_t c = 0; c < in_dim; ++c) dx[c] = 0.0;
    for (std::size_t r = 0; r < out_dim; ++r) {
        const double* wr = w + r * in_dim;
        const double g = dy[r];
        for (std::size_t c = 0; c < in_dim; ++c) dx[c] += g * wr[c];
    }
}

void ger(std::size_t out_dim, std::size_t in_dim, double* dw, const double* dy, const double* x) {
    for (std::size_t r = 0; r < out_dim; ++r) {
        double* dwr = dw + r * in_dim;
        const double g = dy[r];
        for (std::size_t c = 0; c < in_dim; ++c) dwr[c] += g * x[c];
    }
}

// y[co,t] = b[co] + sum_{ci,dk} w[co,ci,dk] * x[ci, t + dk - pad]
void conv1d(int cin, int cout, int k, int t, const double* x, const double* w, const double* b,
            double* y) {
    const int pad = k / 2;
    for (int co = 0; co < cout; ++co) {
        double* yr = y + static_cast<std::size_t>(co) * t;
        for (int i = 0; i < t; ++i) yr[i] = b ? b[co] : 0.0;
        for (int ci = 0; ci < cin; ++ci) {
            const double* xr = x + static_cast<std::size_t>(ci) * t;
            const double* wr = w + (static_cast<std::size_t>(co) * cin + ci) * k;
            for (int dk = 0; dk < k; ++dk) {
                const int off = dk - pad;
                const int t0 = std::max(0, -off);
                const int t1 = std::min(t, t - off);
                const double wv = wr[dk];
                for (int i = t0; i < t1; ++i) yr[i] += wv * xr[i + off];
            }
        }
    }
}

void conv1d_grad_input(int cin, int cout, int k, int t, const double* w, const double* dy,
                       double* dx) {
    const int pad = k / 2;
    for (std::size_t i = 0; i < static_cast<std::size_t>(cin) * t; ++i) dx[i] = 0.0;
    for (int co = 0; co < cout; ++co) {
        const double* gr = dy + static_cast<std::size_t>(co) * t;
        for (int ci = 0; ci < cin; ++ci) {
            double* dxr = dx + static_cast<std::size_t>(ci) * t;
            const double* wr = w + (static_cast<std::size_t>(co) * cin + ci) * k;
            for (int dk = 0; dk < k; ++dk) {
                const int off = dk - pad;
                // dx[ci, i+off] += w * dy[co, i] for valid i; re-index by s = i+off.
                const int s0 = std::max(0, off);
                const int s1 = std::min(t, t + off);
                const double wv = wr[dk];
                for (int s = s0; s < s1; ++s) dxr[s] += wv * gr[s - off];
            }
        }
    }
}

void conv1d_grad_params(int cin, int cout, int k, int t, const double* x, const double* dy,
                        double* dw, double* db) {
    const int pad = k / 2;
    for (int co = 0; co < cout; ++co) {
        const double* gr = dy + static_cast<std::size_t>(co) * t;
        if (db) {
            double s = 0.0;
            for (int i = 0; i < t; ++i) s += gr[i];
            db[co] += s;
        }
        for (int ci = 0; ci < cin; ++ci) {
            const double* xr = x + static_cast<std::size_t>(ci) * t;
            double* dwr = dw + (static_cast<std::size_t>(co) * cin + ci) * k;
            for (int dk = 0; dk < k; ++dk) {
                const int off = dk - pad;
                const int t0 = std::max(0, -off);
                const int t1 = std::min(t, t - off);
                double s = 0.0;
                for (int i = t0; i < t1; ++i) s += gr[i] * xr[i + off];
                dwr[dk] += s;
            }
        }
    }
}

void adam_step(std::size_t n, double* p, const double* g, double* m, double* v, double lr,
               double beta1, double beta2, double eps, double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

const KernelTable kTable = {
    "scalar", fill,    axpy,   scal,     add,       sub,
    mul,      lincomb, clamp,  dot,      sum,       vmax,
    silu,     silu_grad, relu, relu_grad, matvec,   matvec_t,
    ger,      conv1d,  conv1d_grad_input, conv1d_grad_params, adam_step,
};

}  // namespace eaq::kern::scalar
