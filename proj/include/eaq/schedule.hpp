#pragma once

#include <vector>

#include "eaq/tensor.hpp"

namespace eaq {

/// Variance schedule of the forward noising process:
/// beta_k, alpha_k = 1 - beta_k, alpha_bar_k = prod_{s<=k} alpha_s.
/// Index 0 of the vectors holds step k=1.
struct NoiseSchedule {
    int k_steps = 0;
    std::vector<double> betas;
    std::vector<double> alphas;
    std::vector<double> alpha_bars;

    double beta(int k) const { return betas[k - 1]; }
    double alpha(int k) const { return alphas[k - 1]; }
    double alpha_bar(int k) const { return alpha_bars[k - 1]; }
    // alpha_bar_0 = 1 by convention (no noise applied yet).
    double alpha_bar_prev(int k) const { return k >= 2 ? alpha_bars[k - 2] : 1.0; }

    /// Posterior variance beta_tilde_k = (1 - abar_{k-1minus}) / (1 - abar_k) * beta_k.
    double posterior_variance(int k) const {
        return (1.0 - alpha_bar_prev(k)) / (1.0 - alpha_bar(k)) * beta(k);
    }
};

/// Linear beta interpolation over k_steps. Requires k_steps >= 1 and
/// 0 < beta_start <= beta_end < 1.
NoiseSchedule make_schedule(int k_steps, double beta_start = 1e-4, double beta_end = 0.02);

/// tau_k = sqrt(abar_k) * tau0 + sqrt(1 - abar_k) * eps, elementwise.
Mat forward_noise(const Mat& tau0, int k, const Mat& eps, const NoiseSchedule& sched);

}  // namespace eaq
