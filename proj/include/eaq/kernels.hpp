#pragma once

#include <cstddef>

namespace eaq::kern {

enum class Backend { scalar, avx2 };

/// Flat table of the arithmetic inner loops everything else is built on.
/// Each backend fills one table; the active table is picked once at
/// startup from CPU capabilities (override with EAQ_KERNELS=scalar|avx2).
///
/// Conventions:
///  - conv1d kernels are 1-D cross-correlation along the time axis with
///    stride 1 and "same" zero padding (pad = k/2, odd k).
///  - *_grad_input kernels overwrite their output; *_grad_params
///    kernels accumulate (+=) into dw/db.
///  - matvec treats w as row-major (out_dim x in_dim).
struct KernelTable {
    const char* name;

    void (*fill)(std::size_t n, double v, double* x);
    void (*axpy)(std::size_t n, double a, const double* x, double* y);  // y += a*x
    void (*scal)(std::size_t n, double a, double* x);                   // x *= a
    void (*add)(std::size_t n, const double* x, const double* y, double* out);
    void (*sub)(std::size_t n, const double* x, const double* y, double* out);
    void (*mul)(std::size_t n, const double* x, const double* y, double* out);
    // out = a*x + b*y
    void (*lincomb)(std::size_t n, double a, const double* x, double b, const double* y, double* out);
    void (*clamp)(std::size_t n, double lo, double hi, double* x);

    double (*dot)(std::size_t n, const double* x, const double* y);
    double (*sum)(std::size_t n, const double* x);
    double (*vmax)(std::size_t n, const double* x);

    void (*silu)(std::size_t n, const double* x, double* y);
    void (*silu_grad)(std::size_t n, const double* x, const double* dy, double* dx);
    void (*relu)(std::size_t n, const double* x, double* y);
    void (*relu_grad)(std::size_t n, const double* x, const double* dy, double* dx);

    void (*matvec)(std::size_t out_dim, std::size_t in_dim, const double* w, const double* x,
                   const double* b, double* y);  // y = w.x (+ b), b may be null
    void (*matvec_t)(std::size_t out_dim, std::size_t in_dim, const double* w, const double* dy,
                     double* dx);  // dx = w^T.dy (overwrite)
    void (*ger)(std::size_t out_dim, std::size_t in_dim, double* dw, const double* dy,
                const double* x);  // dw += dy (x) x

    void (*conv1d)(int cin, int cout, int k, int t, const double* x, const double* w,
                   const double* b, double* y);
    void (*conv1d_grad_input)(int cin, int cout, int k, int t, const double* w, const double* dy,
                              double* dx);
    void (*conv1d_grad_params)(int cin, int cout, int k, int t, const double* x, const double* dy,
                               double* dw, double* db);

    void (*adam_step)(std::size_t n, double* p, const double* g, double* m, double* v, double lr,
                      double beta1, double beta2, double eps, double bc1, double bc2);
};

/// Table selected for this process (CPU detection + EAQ_KERNELS override).
const KernelTable& active();

Backend backend();
bool avx2_available();

/// Force a backend (tests, benchmarking). Throws if unavailable.
void use(Backend b);

/// Direct access to a specific backend's table, for equivalence tests.
const KernelTable& table(Backend b);

const char* backend_name(Backend b);

}  // namespace eaq::kern
