#include "eaq/schedule.hpp"

#include <cmath>
#include <stdexcept>

#include "eaq/kernels.hpp"

namespace eaq {

NoiseSchedule make_schedule(int k_steps, double beta_start, double beta_end) {
    if (k_steps < 1) throw std::invalid_argument("make_schedule: k_steps must be >= 1");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
        throw std::invalid_argument("make_schedule: need 0 < beta_start <= beta_end < 1");
    NoiseSchedule s;
    s.k_steps = k_steps;
    s.betas.resize(k_steps);
    s.alphas.resize(k_steps);
    s.alpha_bars.resize(k_steps);
    double abar = 1.0;
    for (int i = 0; i < k_steps; ++i) {
        const double beta =
            k_steps == 1 ? beta_start
                         : beta_start + (beta_end - beta_start) * static_cast<double>(i) /
                               static_cast<double>(k_steps - 1);
        s.betas[i] = beta;
        s.alphas[i] = 1.0 - beta;
        abar *= s.alphas[i];
        s.alpha_bars[i] = abar;
    }
    return s;
}

Mat forward_noise(const Mat& tau0, int k, const Mat& eps, const NoiseSchedule& sched) {
    if (!tau0.same_shape(eps)) throw std::invalid_argument("forward_noise: shape mismatch");
    if (k < 1 || k > sched.k_steps)
        throw std::invalid_argument("forward_noise: step k out of [1, K]");
    const double abar = sched.alpha_bar(k);
    Mat out(tau0.rows, tau0.cols);
    kern::active().lincomb(tau0.size(), std::sqrt(abar), tau0.data(), std::sqrt(1.0 - abar),
                           eps.data(), out.data());
    return out;
}

}  // namespace eaq
