#include "eaq/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "eaq/env.hpp"

namespace eaq {

std::optional<double> cooperation_metric(const std::vector<Episode>& dataset, int num_actions) {
    const int first_attack = 5;  // {noop, 4 moves, attack j...}
    if (num_actions <= first_attack)
        throw std::invalid_argument("cooperation_metric: action set has no attack actions");
    long qualifying = 0, focused = 0;
    for (const Episode& e : dataset) {
        for (int t = 0; t < e.length(); ++t) {
            int alive = 0;
            bool all_attack = true;
            int target = -1;
            bool same_target = true;
            for (int n = 0; n < e.num_agents; ++n) {
                if (e.obs[t][n].empty() || e.obs[t][n][0] <= kAliveHpThreshold) continue;
                ++alive;
                const int a = e.actions[t][n];
                if (a < first_attack || a >= num_actions) {
                    all_attack = false;
                    break;
                }
                if (target < 0)
                    target = a;
                else if (a != target)
                    same_target = false;
            }
            if (alive >= 2 && all_attack) {
                ++qualifying;
                if (same_target) ++focused;
            }
        }
    }
    if (qualifying == 0) return std::nullopt;
    return static_cast<double>(focused) / static_cast<double>(qualifying);
}

namespace {

void flatten_obs(const std::vector<Episode>& eps, std::vector<std::vector<double>>& out) {
    for (const Episode& e : eps)
        for (const auto& step : e.obs)
            for (const auto& o : step) out.push_back(o);
}

}  // namespace

double coverage_statistic(const std::vector<Episode>& reference,
                          const std::vector<Episode>& candidate) {
    std::vector<std::vector<double>> ref, cand;
    flatten_obs(reference, ref);
    flatten_obs(candidate, cand);
    if (ref.empty()) throw std::invalid_argument("coverage_statistic: empty reference set");
    if (cand.empty()) return 0.0;
    const std::size_t d = ref.front().size();
    for (const auto& v : cand)
        if (v.size() != d)
            throw std::invalid_argument("coverage_statistic: obs dimension mismatch");

    double total = 0.0;
    for (const auto& c : cand) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& r : ref) {
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double diff = c[i] - r[i];
                s += diff * diff;
                if (s >= best) break;
            }
            if (s < best) best = s;
        }
        total += std::sqrt(best);
    }
    return total / static_cast<double>(cand.size());
}

}  // namespace eaq
