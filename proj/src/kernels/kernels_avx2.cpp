// AVX2 + FMA kernel variants (4-lane f64). Compiled with -mavx2 -mfma on
// x86_64 only; the dispatcher checks cpu support before selecting this table.

#include "kernels_impl.hpp"

#if EAQ_HAVE_AVX2_TU

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace eaq::kern::avx2 {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

// y[0..n) += a * x[0..n)
inline void axpy_n(std::size_t n, double a, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

inline double dot_n(std::size_t n, const double* x, const double* y) {
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
    }
    for (; i + 4 <= n; i += 4)
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    double s = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

// Unfolded input patches for the conv kernels: row t holds
// x[ci, t + dk - pad] over (ci, dk), zero at the borders. Time-axis rows
// are short here, so long (cin*k)-wide dots beat shifted row operations.
thread_local std::vector<double> g_cols;

void im2col(int cin, int k, int t, const double* x) {
    const int pad = k / 2;
    const std::size_t ck = static_cast<std::size_t>(cin) * k;
    g_cols.assign(static_cast<std::size_t>(t) * ck, 0.0);
    for (int ci = 0; ci < cin; ++ci) {
        const double* xr = x + static_cast<std::size_t>(ci) * t;
        for (int dk = 0; dk < k; ++dk) {
            const int off = dk - pad;
            const int t0 = off < 0 ? -off : 0;
            const int t1 = off > 0 ? t - off : t;
            double* dst = g_cols.data() + static_cast<std::size_t>(ci) * k + dk;
            for (int i = t0; i < t1; ++i) dst[static_cast<std::size_t>(i) * ck] = xr[i + off];
        }
    }
}

}  // namespace

void fill(std::size_t n, double v, double* x) {
    const __m256d vv = _mm256_set1_pd(v);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, vv);
    for (; i < n; ++i) x[i] = v;
}

void axpy(std::size_t n, double a, const double* x, double* y) { axpy_n(n, a, x, y); }

void scal(std::size_t n, double a, double* x) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

void add(std::size_t n, const double* x, const double* y, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] + y[i];
}

void sub(std::size_t n, const double* x, const double* y, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] - y[i];
}

void mul(std::size_t n, const double* x, const double* y, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void lincomb(std::size_t n, double a, const double* x, double b, const double* y, double* out) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        r = _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), r);
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void clamp(std::size_t n, double lo, double hi, double* x) {
    const __m256d vlo = _mm256_set1_pd(lo);
    const __m256d vhi = _mm256_set1_pd(hi);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        v = _mm256_min_pd(_mm256_max_pd(v, vlo), vhi);
        _mm256_storeu_pd(x + i, v);
    }
    for (; i < n; ++i) x[i] = std::clamp(x[i], lo, hi);
}

double dot(std::size_t n, const double* x, const double* y) { return dot_n(n, x, y); }

double sum(std::size_t n, const double* x) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double vmax(std::size_t n, const double* x) {
    if (n < 4) {
        double m = x[0];
        for (std::size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
        return m;
    }
    __m256d acc = _mm256_loadu_pd(x);
    std::size_t i = 4;
    for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
    double m = hmax(acc);
    for (; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

void relu(std::size_t n, const double* x, double* y) {
    const __m256d z = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), z));
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_grad(std::size_t n, const double* x, const double* dy, double* dx) {
    const __m256d z = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), z, _CMP_GT_OQ);
        _mm256_storeu_pd(dx + i, _mm256_and_pd(mask, _mm256_loadu_pd(dy + i)));
    }
    for (; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

void matvec(std::size_t out_dim, std::size_t in_dim, const double* w, const double* x,
            const double* b, double* y) {
    for (std::size_t r = 0; r < out_dim; ++r)
        y[r] = (b ? b[r] : 0.0) + dot_n(in_dim, w + r * in_dim, x);
}

void matvec_t(std::size_t out_dim, std::size_t in_dim, const double* w, const double* dy,
              double* dx) {
    fill(in_dim, 0.0, dx);
    for (std::size_t r = 0; r < out_dim; ++r) axpy_n(in_dim, dy[r], w + r * in_dim, dx);
}

void ger(std::size_t out_dim, std::size_t in_dim, double* dw, const double* dy, const double* x) {
    for (std::size_t r = 0; r < out_dim; ++r) axpy_n(in_dim, dy[r], x, dw + r * in_dim);
}

// im2col formulation: unfold once, then every output element is one long
// (cin*k)-wide dot. The weight layout (cout, cin, k) matches the patch
// layout exactly, so w rows are used as-is.
void conv1d(int cin, int cout, int k, int t, const double* x, const double* w, const double* b,
            double* y) {
    im2col(cin, k, t, x);
    const std::size_t ck = static_cast<std::size_t>(cin) * k;
    for (int co = 0; co < cout; ++co) {
        const double* wr = w + static_cast<std::size_t>(co) * ck;
        double* yr = y + static_cast<std::size_t>(co) * t;
        const double bias = b ? b[co] : 0.0;
        for (int i = 0; i < t; ++i) yr[i] = bias + dot_n(ck, wr, g_cols.data() + i * ck);
    }
}

void conv1d_grad_input(int cin, int cout, int k, int t, const double* w, const double* dy,
                       double* dx) {
    const int pad = k / 2;
    const std::size_t ck = static_cast<std::size_t>(cin) * k;
    // patch-space gradient: gcols[t'] = sum_co dy[co, t'] * w[co, :]
    g_cols.assign(static_cast<std::size_t>(t) * ck, 0.0);
    for (int co = 0; co < cout; ++co) {
        const double* gr = dy + static_cast<std::size_t>(co) * t;
        const double* wr = w + static_cast<std::size_t>(co) * ck;
        for (int i = 0; i < t; ++i)
            if (gr[i] != 0.0) axpy_n(ck, gr[i], wr, g_cols.data() + i * ck);
    }
    // fold patches back onto the input (col2im)
    fill(static_cast<std::size_t>(cin) * t, 0.0, dx);
    for (int ci = 0; ci < cin; ++ci) {
        double* dxr = dx + static_cast<std::size_t>(ci) * t;
        for (int dk = 0; dk < k; ++dk) {
            const int off = dk - pad;
            const int t0 = off < 0 ? -off : 0;
            const int t1 = off > 0 ? t - off : t;
            const double* src = g_cols.data() + static_cast<std::size_t>(ci) * k + dk;
            for (int i = t0; i < t1; ++i) dxr[i + off] += src[static_cast<std::size_t>(i) * ck];
        }
    }
}

void conv1d_grad_params(int cin, int cout, int k, int t, const double* x, const double* dy,
                        double* dw, double* db) {
    im2col(cin, k, t, x);
    const std::size_t ck = static_cast<std::size_t>(cin) * k;
    for (int co = 0; co < cout; ++co) {
        const double* gr = dy + static_cast<std::size_t>(co) * t;
        if (db) db[co] += sum(static_cast<std::size_t>(t), gr);
        double* dwr = dw + static_cast<std::size_t>(co) * ck;
        for (int i = 0; i < t; ++i)
            if (gr[i] != 0.0) axpy_n(ck, gr[i], g_cols.data() + i * ck, dwr);
    }
}

void adam_step(std::size_t n, double* p, const double* g, double* m, double* v, double lr,
               double beta1, double beta2, double eps, double bc1, double bc2) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb1c = _mm256_set1_pd(1.0 - beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d vb2c = _mm256_set1_pd(1.0 - beta2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d vibc1 = _mm256_set1_pd(1.0 / bc1);
    const __m256d vibc2 = _mm256_set1_pd(1.0 / bc2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vg = _mm256_loadu_pd(g + i);
        __m256d vm = _mm256_fmadd_pd(vb1c, vg, _mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)));
        __m256d vv = _mm256_fmadd_pd(vb2c, _mm256_mul_pd(vg, vg),
                                     _mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)));
        _mm256_storeu_pd(m + i, vm);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_mul_pd(vm, vibc1);
        const __m256d vhat = _mm256_mul_pd(vv, vibc2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
        const __m256d upd = _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), upd));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}

const KernelTable kTable = {
    "avx2",   fill,    axpy,   scal,     add,       sub,
    mul,      lincomb, clamp,  dot,      sum,       vmax,
    eaq::kern::scalar::silu, eaq::kern::scalar::silu_grad, relu, relu_grad, matvec, matvec_t,
    ger,      conv1d,  conv1d_grad_input, conv1d_grad_params, adam_step,
};

}  // namespace eaq::kern::avx2

#endif  // EAQ_HAVE_AVX2_TU
