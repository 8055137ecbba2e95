#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "eaq/metrics.hpp"
#include "eaq/rng.hpp"

using namespace eaq;

namespace {

// obs[0] is the own-hp channel the aliveness test reads
Episode attack_episode(const std::vector<std::vector<int>>& actions, int num_agents) {
    Episode e;
    e.num_agents = num_agents;
    const int t = static_cast<int>(actions.size());
    e.obs.assign(t, std::vector<std::vector<double>>(num_agents, {1.0, 0.5, 0.5}));
    e.actions = actions;
    e.rewards.assign(t, 0.0);
    return e;
}

}  // namespace

TEST_CASE("cooperation metric: always-focused episodes score 1") {
    // both agents attack enemy 0 (action id 5) every step
    const Episode e = attack_episode({{5, 5}, {5, 5}, {5, 5}}, 2);
    const auto m = cooperation_metric({e}, 7);
    REQUIRE(m.has_value());
    CHECK(*m == doctest::Approx(1.0));
}

TEST_CASE("cooperation metric: no qualifying timestep gives null") {
    // one agent always moves, so "all alive agents attack" never holds
    const Episode e = attack_episode({{5, 1}, {2, 6}, {0, 5}}, 2);
    CHECK(!cooperation_metric({e}, 7).has_value());
}

TEST_CASE("cooperation metric: two focused of four attack steps is 0.5") {
    const Episode e = attack_episode({{5, 5}, {5, 6}, {6, 6}, {6, 5}}, 2);
    const auto m = cooperation_metric({e}, 7);
    REQUIRE(m.has_value());
    CHECK(*m == doctest::Approx(0.5));
}

TEST_CASE("cooperation metric: dead agents are excluded, lone attacker does not count") {
    Episode e = attack_episode({{5, 6}, {5, 6}}, 2);
    // agent 1 dead at both steps: hp channel 0
    e.obs[0][1][0] = 0.0;
    e.obs[1][1][0] = 0.0;
    // only one alive attacker -> no qualifying step at all
    CHECK(!cooperation_metric({e}, 7).has_value());
}

TEST_CASE("coverage: self-coverage is zero") {
    Rng rng = make_rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Episode e;
    e.num_agents = 2;
    e.obs.assign(4, std::vector<std::vector<double>>(2, std::vector<double>(3)));
    for (auto& step : e.obs)
        for (auto& o : step)
            for (double& v : o) v = dist(rng);
    e.actions.assign(4, {0, 0});
    e.rewards.assign(4, 0.0);
    CHECK(coverage_statistic({e}, {e}) == doctest::Approx(0.0));
}

TEST_CASE("coverage: uniform translation by delta gives delta*sqrt(d)") {
    Episode ref;
    ref.num_agents = 1;
    ref.obs = {{{0.0, 0.0, 0.0, 0.0}}, {{1.0, 1.0, 1.0, 1.0}}};
    ref.actions.assign(2, {0});
    ref.rewards.assign(2, 0.0);
    Episode cand = ref;
    const double delta = 0.25;
    for (auto& step : cand.obs)
        for (auto& o : step)
            for (double& v : o) v += delta;
    CHECK(coverage_statistic({ref}, {cand}) == doctest::Approx(delta * 2.0).epsilon(1e-12));
}

TEST_CASE("coverage matches an O(n^2) oracle on random sets") {
    Rng rng = make_rng(9);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    auto random_eps = [&](int count, int t) {
        std::vector<Episode> out;
        for (int i = 0; i < count; ++i) {
            Episode e;
            e.num_agents = 2;
            e.obs.assign(t, std::vector<std::vector<double>>(2, std::vector<double>(4)));
            for (auto& step : e.obs)
                for (auto& o : step)
                    for (double& v : o) v = dist(rng);
            e.actions.assign(t, {0, 0});
            e.rewards.assign(t, 0.0);
            out.push_back(e);
        }
        return out;
    };
    const auto ref = random_eps(3, 5);
    const auto cand = random_eps(4, 3);
    // oracle: flatten and scan without any pruning
    std::vector<std::vector<double>> rv, cv;
    for (const auto& e : ref)
        for (const auto& s : e.obs)
            for (const auto& o : s) rv.push_back(o);
    for (const auto& e : cand)
        for (const auto& s : e.obs)
            for (const auto& o : s) cv.push_back(o);
    double want = 0.0;
    for (const auto& c : cv) {
        double best = 1e300;
        for (const auto& r : rv) {
            double s = 0.0;
            for (std::size_t i = 0; i < c.size(); ++i) s += (c[i] - r[i]) * (c[i] - r[i]);
            best = std::min(best, s);
        }
        want += std::sqrt(best);
    }
    want /= cv.size();
    CHECK(std::abs(coverage_statistic(ref, cand) - want) <= 1e-9);
}

TEST_CASE("coverage: empty reference is an error") {
    CHECK_THROWS_AS(coverage_statistic({}, {}), std::invalid_argument);
}
