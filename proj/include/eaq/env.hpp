#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eaq/episode.hpp"
#include "eaq/rng.hpp"

namespace eaq {

/// Cooperative focus-fire battle on a small grid: N allies vs M stationary
/// enemies. Actions: noop, move N/S/E/W, attack enemy j (|A| = 5 + M).
/// Attacks are range-free, deal 1 damage to a living target, and enemies
/// retaliate on their nearest attacker each step. Rewards: +dmg_reward per
/// damage point, +kill_reward per kill, +victory_reward * (alive allies / N)
/// on wiping the enemy team. Every step reward is >= 0 and the episode
/// return is bounded by victory + M * (kill + dmg * hp).
struct EnvConfig {
    int num_allies = 3;
    int num_enemies = 3;
    int grid = 5;
    int enemy_hp = 3;
    int ally_hp = 3;
    int t_max = 30;
    double dmg_reward = 0.1;
    double kill_reward = 1.0;
    double victory_reward = 20.0;

    int num_actions() const { return 5 + num_enemies; }
    // own hp, own (x, y), per enemy: rel x, rel y, hp, alive
    int obs_dim() const { return 3 + 4 * num_enemies; }
    double max_return() const {
        return victory_reward + num_enemies * (kill_reward + dmg_reward * enemy_hp);
    }
    void validate() const;
};

// hp-channel threshold below which an agent reads as dead; used both for
// forced noops in the env and when decoding generated observations.
constexpr double kAliveHpThreshold = 0.2;

struct FocusFireEnv {
    struct Unit {
        int x = 0, y = 0;
        int hp = 0;
        bool alive() const { return hp > 0; }
    };

    EnvConfig cfg;
    std::vector<Unit> allies;
    std::vector<Unit> enemies;
    int step_count = 0;
    bool done = false;

    explicit FocusFireEnv(const EnvConfig& config) : cfg(config) { cfg.validate(); }

    /// Seeded random distinct spawn cells; returns initial observations.
    std::vector<std::vector<double>> reset(std::uint64_t seed);

    struct StepResult {
        std::vector<std::vector<double>> obs;
        double reward = 0.0;
        bool done = false;
    };
    /// Applies one joint action (dead agents are forced to noop).
    StepResult step(const std::vector<int>& actions);

    std::vector<std::vector<double>> observe() const;
    bool ally_alive(int n) const { return allies[n].alive(); }
};

/// Scripted behavior policy: attack the lowest-HP living enemy, with
/// probability epsilon a uniformly random action instead.
int scripted_action(const FocusFireEnv& env, int agent, double epsilon, Rng& rng);

enum class PolicyQuality { medium, poor };  // epsilon 0.3 / 0.9

/// Roll out num_episodes scripted episodes and label them with
/// reward-to-go at the given gamma.
std::vector<Episode> generate_offline_dataset(const EnvConfig& cfg, PolicyQuality quality,
                                              int num_episodes, double gamma, std::uint64_t seed);

double policy_epsilon(PolicyQuality q);

}  // namespace eaq
