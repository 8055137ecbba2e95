// Backend selection. Picks AVX2 when the CPU supports it, unless the
// EAQ_KERNELS environment variable pins a backend.

#include "eaq/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"

namespace eaq::kern {

namespace {

bool cpu_has_avx2() {
#if EAQ_HAVE_AVX2_TU
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend detect() {
    if (const char* env = std::getenv("EAQ_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0) {
            if (!cpu_has_avx2())
                throw std::runtime_error("EAQ_KERNELS=avx2 but this CPU/build lacks AVX2+FMA");
            return Backend::avx2;
        }
        throw std::runtime_error(std::string("unknown EAQ_KERNELS value: ") + env);
    }
    return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

Backend g_backend = detect();

}  // namespace

bool avx2_available() { return cpu_has_avx2(); }

const KernelTable& table(Backend b) {
#if EAQ_HAVE_AVX2_TU
    if (b == Backend::avx2) return avx2::kTable;
#else
    if (b == Backend::avx2) throw std::runtime_error("AVX2 backend not compiled on this target");
#endif
    return scalar::kTable;
}

const KernelTable& active() { return table(g_backend); }

Backend backend() { return g_backend; }

void use(Backend b) {
    if (b == Backend::avx2 && !cpu_has_avx2())
        throw std::runtime_error("AVX2 kernels unavailable on this CPU/build");
    g_backend = b;
}

const char* backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

}  // namespace eaq::kern
