#include "eaq/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace eaq {

void EnvConfig::validate() const {
    if (num_allies < 1 || num_enemies < 1) throw std::invalid_argument("EnvConfig: need units");
    if (grid < 2) throw std::invalid_argument("EnvConfig: grid too small");
    if (enemy_hp < 1 || ally_hp < 1) throw std::invalid_argument("EnvConfig: hp must be >= 1");
    if (t_max < 1) throw std::invalid_argument("EnvConfig: t_max must be >= 1");
}

std::vector<std::vector<double>> FocusFireEnv::reset(std::uint64_t seed) {
    Rng rng = make_rng(seed);
    const int cells = cfg.grid * cfg.grid;
    const int units = cfg.num_allies + cfg.num_enemies;
    if (units > cells) throw std::invalid_argument("FocusFireEnv: more units than cells");
    std::vector<int> cell_ids(cells);
    std::iota(cell_ids.begin(), cell_ids.end(), 0);
    std::shuffle(cell_ids.begin(), cell_ids.end(), rng);
    allies.assign(cfg.num_allies, {});
    enemies.assign(cfg.num_enemies, {});
    for (int i = 0; i < cfg.num_allies; ++i)
        allies[i] = {cell_ids[i] % cfg.grid, cell_ids[i] / cfg.grid, cfg.ally_hp};
    for (int j = 0; j < cfg.num_enemies; ++j) {
        const int c = cell_ids[cfg.num_allies + j];
        enemies[j] = {c % cfg.grid, c / cfg.grid, cfg.enemy_hp};
    }
    step_count = 0;
    done = false;
    return observe();
}

std::vector<std::vector<double>> FocusFireEnv::observe() const {
    const double span = static_cast<double>(cfg.grid - 1);
    std::vector<std::vector<double>> obs(cfg.num_allies, std::vector<double>(cfg.obs_dim(), 0.0));
    for (int n = 0; n < cfg.num_allies; ++n) {
        const Unit& a = allies[n];
        if (!a.alive()) continue;  // dead agents observe zeros
        auto& o = obs[n];
        o[0] = static_cast<double>(a.hp) / cfg.ally_hp;
        o[1] = a.x / span;
        o[2] = a.y / span;
        for (int j = 0; j < cfg.num_enemies; ++j) {
            const Unit& e = enemies[j];
            const int base = 3 + 4 * j;
            if (!e.alive()) continue;
            o[base + 0] = (e.x - a.x) / span;
            o[base + 1] = (e.y - a.y) / span;
            o[base + 2] = static_cast<double>(e.hp) / cfg.enemy_hp;
            o[base + 3] = 1.0;
        }
    }
    return obs;
}

FocusFireEnv::StepResult FocusFireEnv::step(const std::vector<int>& actions) {
    if (done) throw std::logic_error("FocusFireEnv: step after terminal");
    if (static_cast<int>(actions.size()) != cfg.num_allies)
        throw std::invalid_argument("FocusFireEnv: wrong number of actions");
    for (int a : actions)
        if (a < 0 || a >= cfg.num_actions())
            throw std::invalid_argument("FocusFireEnv: action id out of range");

    static constexpr int kDx[4] = {0, 0, 1, -1};
    static constexpr int kDy[4] = {-1, 1, 0, 0};

    // 1) moves, clamped to the grid (dead agents are forced noop)
    for (int n = 0; n < cfg.num_allies; ++n) {
        if (!allies[n].alive()) continue;
        const int act = actions[n];
        if (act >= 1 && act <= 4) {
            allies[n].x = std::clamp(allies[n].x + kDx[act - 1], 0, cfg.grid - 1);
            allies[n].y = std::clamp(allies[n].y + kDy[act - 1], 0, cfg.grid - 1);
        }
    }

    // 2) attacks resolve in agent order; hits on dead targets do nothing
    double reward = 0.0;
    std::vector<std::vector<int>> attackers(cfg.num_enemies);
    for (int n = 0; n < cfg.num_allies; ++n) {
        if (!allies[n].alive()) continue;
        const int act = actions[n];
        if (act < 5) continue;
        const int j = act - 5;
        if (!enemies[j].alive()) continue;
        attackers[j].push_back(n);
        enemies[j].hp -= 1;
        reward += cfg.dmg_reward;
        if (!enemies[j].alive()) reward += cfg.kill_reward;
    }

    // 3) surviving enemies strike back at their nearest attacker
    for (int j = 0; j < cfg.num_enemies; ++j) {
        if (!enemies[j].alive() || attackers[j].empty()) continue;
        int target = -1, best = std::numeric_limits<int>::max();
        for (int n : attackers[j]) {
            if (!allies[n].alive()) continue;
            const int dist =
                std::abs(allies[n].x - enemies[j].x) + std::abs(allies[n].y - enemies[j].y);
            if (dist < best) {
                best = dist;
                target = n;
            }
        }
        if (target >= 0) allies[target].hp = std::max(0, allies[target].hp - 1);
    }

    ++step_count;
    const bool all_enemies_dead =
        std::none_of(enemies.begin(), enemies.end(), [](const Unit& u) { return u.alive(); });
    const bool all_allies_dead =
        std::none_of(allies.begin(), allies.end(), [](const Unit& u) { return u.alive(); });
    if (all_enemies_dead) {
        const int survivors = static_cast<int>(
            std::count_if(allies.begin(), allies.end(), [](const Unit& u) { return u.alive(); }));
        reward += cfg.victory_reward * survivors / cfg.num_allies;
        done = true;
    } else if (all_allies_dead || step_count >= cfg.t_max) {
        done = true;
    }

    StepResult res;
    res.obs = observe();
    res.reward = reward;
    res.done = done;
    return res;
}

double policy_epsilon(PolicyQuality q) { return q == PolicyQuality::medium ? 0.3 : 0.9; }

int scripted_action(const FocusFireEnv& env, int agent, double epsilon, Rng& rng) {
    if (!env.allies[agent].alive()) return 0;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
        std::uniform_int_distribution<int> any(0, env.cfg.num_actions() - 1);
        return any(rng);
    }
    // focus fire: lowest-HP living enemy, ties to the lowest index
    int target = -1, best_hp = std::numeric_limits<int>::max();
    for (int j = 0; j < env.cfg.num_enemies; ++j) {
        if (env.enemies[j].alive() && env.enemies[j].hp < best_hp) {
            best_hp = env.enemies[j].hp;
            target = j;
        }
    }
    return target < 0 ? 0 : 5 + target;
}

std::vector<Episode> generate_offline_dataset(const EnvConfig& cfg, PolicyQuality quality,
                                              int num_episodes, double gamma, std::uint64_t seed) {
    if (num_episodes < 1)
        throw std::invalid_argument("generate_offline_dataset: num_episodes >= 1");
    const double epsilon = policy_epsilon(quality);
    std::vector<Episode> out;
    out.reserve(num_episodes);
    FocusFireEnv env(cfg);
    for (int ep = 0; ep < num_episodes; ++ep) {
        Rng rng = make_rng(derive_seed(seed, "episode", static_cast<std::uint64_t>(ep)));
        auto obs = env.reset(derive_seed(seed, "spawn", static_cast<std::uint64_t>(ep)));
        Episode e;
        e.num_agents = cfg.num_allies;
        e.source = "real";
        while (true) {
            std::vector<int> actions(cfg.num_allies);
            for (int n = 0; n < cfg.num_allies; ++n)
                actions[n] = scripted_action(env, n, epsilon, rng);
            e.obs.push_back(obs);
            e.actions.push_back(actions);
            auto res = env.step(actions);
            e.rewards.push_back(res.reward);
            obs = std::move(res.obs);
            if (res.done) break;
        }
        out.push_back(compute_reward_to_go(e, gamma));
    }
    return out;
}

}  // namespace eaq
