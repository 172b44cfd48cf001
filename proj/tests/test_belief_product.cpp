#include <random>

#include <gtest/gtest.h>

#include "deceptive/belief_product.hpp"
#include "deceptive/planners.hpp"
#include "deceptive/scenarios.hpp"
#include "deceptive/sim.hpp"
#include "random_mdp.hpp"

using namespace deceptive;

namespace {

double probability_of(const Distribution& dist, std::uint32_t index) {
    for (const auto& o : dist) {
        if (o.index == index) return o.probability;
    }
    return 0.0;
}

/// Random kernel over `nB` beliefs defined on the agent's permissible pairs.
BeliefKernel random_kernel(std::mt19937_64& rng, const Mdp& agent, std::size_t nB) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return BeliefKernel::from_generator(agent, nB, [&](StateId, BeliefId, ActionId) {
        std::vector<double> w(nB);
        double sum = 0.0;
        for (double& v : w) sum += (v = 0.05 + unit(rng));
        Distribution d;
        for (std::uint32_t k = 0; k < nB; ++k) d.push_back({k, w[k] / sum});
        return d;
    });
}

BeliefReward random_reward(std::mt19937_64& rng, const Mdp& agent, std::size_t nB) {
    std::uniform_real_distribution<double> r(-1.0, 1.0);
    return BeliefReward::from_generator(agent, nB, [&](StateId, BeliefId, ActionId) { return r(rng); });
}

}  // namespace

TEST(BuildProductMdp, PresetScenarioSizes) {
    const auto cops = build_cops_scenario(CopsConfig{});
    const auto cp = build_product_mdp(cops.agent, cops.kernel, cops.reward);
    EXPECT_EQ(cp.mdp.state_count(), 192u);
    EXPECT_EQ(cp.mdp.action_count(), 5u);

    const auto camo = build_camo_scenario(CamoConfig{});
    const auto mp = build_product_mdp(camo.agent, camo.kernel, camo.reward);
    EXPECT_EQ(mp.mdp.state_count(), 625u);
    EXPECT_EQ(mp.mdp.action_count(), 10u);
    EXPECT_TRUE(validate_mdp(mp.mdp).empty());
}

TEST(BuildProductMdp, SMajorIndexing) {
    ProductMdp p{Mdp(12, 1), 4, 3};
    EXPECT_EQ(p.index(2, 1), 7u);
    EXPECT_EQ(p.agent_state(7), 2u);
    EXPECT_EQ(p.belief(7), 1u);
}

TEST(BuildProductMdp, KernelFactorizesAndMarginalizes) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const auto agent = test_support::random_mdp(rng, 4, 3);
        const std::size_t nB = 1 + rng() % 4;
        const auto kernel = random_kernel(rng, agent, nB);
        const auto product = build_product_mdp(agent, kernel, random_reward(rng, agent, nB));
        for (StateId s = 0; s < 4; ++s) {
            for (BeliefId b = 0; b < nB; ++b) {
                for (ActionId a : agent.permissible(s)) {
                    const auto& row = product.mdp.transition(product.index(s, b), a);
                    for (StateId s2 = 0; s2 < 4; ++s2) {
                        double marginal = 0.0;
                        for (BeliefId b2 = 0; b2 < nB; ++b2) {
                            const double got = probability_of(row, product.index(s2, b2));
                            marginal += got;
                            const double want = probability_of(agent.transition(s, a), s2) *
                                                probability_of(kernel.at(s, b, a), b2);
                            EXPECT_NEAR(got, want, 1e-12);
                        }
                        EXPECT_NEAR(marginal, probability_of(agent.transition(s, a), s2), 1e-9);
                    }
                }
            }
        }
    }
}

TEST(BuildProductMdp, SingletonBeliefMatchesAgentValues) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const auto agent = test_support::random_mdp(rng, 5, 3);
        const auto kernel = BeliefKernel::from_generator(
            agent, 1, [](StateId, BeliefId, ActionId) { return Distribution{{0, 1.0}}; });
        const auto reward = BeliefReward::from_generator(
            agent, 1, [&](StateId s, BeliefId, ActionId a) { return agent.reward(s, a); });
        const auto product = build_product_mdp(agent, kernel, reward);
        const auto a = backward_induction(agent, 7);
        const auto b = backward_induction(product.mdp, 7);
        for (StateId s = 0; s < 5; ++s) EXPECT_NEAR(a.values.value(0, s), b.values.value(0, s), 1e-9);
    }
}

TEST(BuildProductMdp, RejectsMissingOrBadEntries) {
    std::mt19937_64 rng(4);
    const auto agent = test_support::random_mdp(rng, 3, 2);
    auto kernel = random_kernel(rng, agent, 2);
    auto reward = random_reward(rng, agent, 2);
    const ActionId a = agent.permissible(0).front();

    auto missing = kernel;
    missing.set(0, 1, a, {});
    EXPECT_THROW(build_product_mdp(agent, missing, reward), ProductBuildError);

    auto short_row = kernel;
    short_row.set(0, 1, a, {{0, 0.5}, {1, 0.4}});
    EXPECT_THROW(build_product_mdp(agent, short_row, reward), ProductBuildError);

    auto no_reward = reward;
    no_reward.set(0, 0, a, std::numeric_limits<double>::quiet_NaN());
    EXPECT_THROW(build_product_mdp(agent, kernel, no_reward), ProductBuildError);
}

// Forbidden states ---------------------------------------------------------------

namespace {

struct CopsFixture {
    CopsConfig cfg;
    ScenarioBundle bundle = build_cops_scenario(cfg);
    ProductMdp product = build_product_mdp(bundle.agent, bundle.kernel, bundle.reward);
    StateId g2 = bundle.grid.state(cfg.goals[1]);
    StateId g3 = bundle.grid.state(cfg.goals[2]);
};

void expect_never_visits(const CopsFixture& f, const ProductMdp& constrained,
                         const std::set<StateId>& forbidden) {
    const auto plan = plan_optimal_deception(constrained, 600);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto trace = simulate_run(f.bundle, BeliefPolicy{plan.policy}, 600, seed);
        for (const auto& step : trace.steps) {
            ASSERT_FALSE(forbidden.contains(step.state)) << "seed " << seed << " t " << step.t;
        }
    }
}

}  // namespace

TEST(ApplyForbiddenStates, EmptySetIsIdentity) {
    CopsFixture f;
    const auto same = apply_forbidden_states(f.product, {});
    for (StateId x = 0; x < f.product.mdp.state_count(); ++x) {
        EXPECT_EQ(same.mdp.permissible(x), f.product.mdp.permissible(x));
    }
}

TEST(ApplyForbiddenStates, BothFalseGoalsNeverVisited) {
    CopsFixture f;
    const std::set<StateId> forbidden{f.g2, f.g3};
    expect_never_visits(f, apply_forbidden_states(f.product, forbidden), forbidden);
}

TEST(ApplyForbiddenStates, TopFalseGoalNeverVisited) {
    CopsFixture f;
    const std::set<StateId> forbidden{f.g2};
    expect_never_visits(f, apply_forbidden_states(f.product, forbidden), forbidden);
}

TEST(ApplyForbiddenStates, NoPermissibleActionEntersForbidden) {
    CopsFixture f;
    const auto c = apply_forbidden_states(f.product, {f.g2, f.g3});
    for (StateId x = 0; x < c.mdp.state_count(); ++x) {
        const auto s = c.agent_state(x);
        if (s == f.g2 || s == f.g3) continue;
        for (ActionId a : c.mdp.permissible(x)) {
            for (const auto& o : c.mdp.transition(x, a)) {
                const auto s2 = c.agent_state(o.index);
                EXPECT_FALSE(s2 == f.g2 || s2 == f.g3);
            }
        }
    }
}

TEST(ApplyForbiddenStates, IsIdempotent) {
    CopsFixture f;
    const std::set<StateId> forbidden{f.g2, f.g3};
    const auto once = apply_forbidden_states(f.product, forbidden);
    const auto twice = apply_forbidden_states(once, forbidden);
    for (StateId x = 0; x < once.mdp.state_count(); ++x) {
        EXPECT_EQ(once.mdp.permissible(x), twice.mdp.permissible(x));
    }
}

TEST(ApplyForbiddenStates, ReportsDeadEnd) {
    // 0 -> 1 -> 2 chain where state 1 can only move into 2.
    Mdp agent(3, 1);
    agent.set_permissible(0, {0});
    agent.set_permissible(1, {0});
    agent.set_permissible(2, {0});
    agent.set_transition(0, 0, {{1, 1.0}});
    agent.set_transition(1, 0, {{2, 1.0}});
    agent.set_transition(2, 0, {{2, 1.0}});
    const auto kernel = BeliefKernel::from_generator(
        agent, 1, [](StateId, BeliefId, ActionId) { return Distribution{{0, 1.0}}; });
    const auto reward =
        BeliefReward::from_generator(agent, 1, [](StateId, BeliefId, ActionId) { return 0.0; });
    const auto product = build_product_mdp(agent, kernel, reward);
    try {
        apply_forbidden_states(product, {2}, {0});
        FAIL() << "expected InfeasibleConstraintError";
    } catch (const InfeasibleConstraintError& e) {
        EXPECT_EQ(e.agent_state(), 1u);
    }
    EXPECT_THROW(apply_forbidden_states(product, {0}, {0}), InfeasibleConstraintError);
}
