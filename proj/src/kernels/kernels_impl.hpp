#pragma once

// Internal glue between the kernel backends and the dispatcher.

#include "eaq/kernels.hpp"

namespace eaq::kern::scalar {
extern const KernelTable kTable;
// Transcendental kernels stay scalar in every backend; the AVX2 table
// reuses these symbols directly.
void silu(std::size_t n, const double* x, double* y);
void silu_grad(std::size_t n, const double* x, const double* dy, double* dx);
}  // namespace eaq::kern::scalar

#if defined(__x86_64__) || defined(_M_X64)
#define EAQ_HAVE_AVX2_TU 1
namespace eaq::kern::avx2 {
extern const KernelTable kTable;
}
#else
#define EAQ_HAVE_AVX2_TU 0
#endif
