#include "eaq/rad.hpp"

#include <stdexcept>

#include "eaq/rng.hpp"

namespace eaq {

void RadConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= beta))
        throw std::invalid_argument("RadConfig: need 0 < alpha <= beta");
}

std::vector<Episode> rad_augment(const std::vector<Episode>& episodes, const RadConfig& config) {
    config.validate();
    std::vector<Episode> out;
    out.reserve(episodes.size());
    for (std::size_t idx = 0; idx < episodes.size(); ++idx) {
        // per-episode derived stream keeps episodes independent of ordering
        Rng rng = make_rng(derive_seed(config.seed, "rad-episode", idx));
        std::uniform_real_distribution<double> z_dist(config.alpha, config.beta);
        Episode e = episodes[idx];
        for (auto& step : e.obs) {
            for (auto& agent_obs : step) {
                if (config.mode == RadConfig::Mode::single) {
                    const double z = z_dist(rng);
                    for (double& v : agent_obs) v *= z;
                } else {
                    for (double& v : agent_obs) v *= z_dist(rng);
                }
            }
        }
        e.source = config.mode == RadConfig::Mode::single ? "rad_s" : "rad_m";
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace eaq
