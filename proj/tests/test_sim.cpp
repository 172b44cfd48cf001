#include <sstream>

#include <gtest/gtest.h>

#include "deceptive/sim.hpp"

using namespace deceptive;

namespace {

SimTrace trace_of(const std::vector<double>& rewards) {
    SimTrace trace;
    for (std::size_t t = 0; t < rewards.size(); ++t) {
        trace.steps.push_back({static_cast<int>(t), 0, 0, 0, rewards[t]});
    }
    return trace;
}

struct CopsSetup {
    CopsConfig cfg;
    ScenarioBundle bundle = build_cops_scenario(cfg);
    ProductMdp product = build_product_mdp(bundle.agent, bundle.kernel, bundle.reward);
};

}  // namespace

TEST(AverageRewardCurve, HandExamples) {
    const auto a = average_reward_curve(trace_of({0, 10, 0}));
    ASSERT_EQ(a.size(), 2u);
    EXPECT_DOUBLE_EQ(a[0], 10.0);
    EXPECT_DOUBLE_EQ(a[1], 5.0);

    const auto b = average_reward_curve(trace_of({0, 10}));
    ASSERT_EQ(b.size(), 1u);
    EXPECT_DOUBLE_EQ(b[0], 10.0);

    const auto c = average_reward_curve(trace_of(std::vector<double>(6, 10.0)));
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double tp = static_cast<double>(k + 1);
        EXPECT_DOUBLE_EQ(c[k], 10.0 * (tp + 1.0) / tp);
    }
}

TEST(SimulateRun, CopsNominalWaitsThenGetsCaught) {
    CopsSetup s;
    const int T = 2000;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto trace = simulate_run(s.bundle, StatePolicy{s.bundle.nominal_policy(T)}, T, seed);
        ASSERT_EQ(trace.steps.size(), static_cast<std::size_t>(T + 1));
        for (int t = 0; t < 8; ++t) EXPECT_EQ(trace.steps[t].reward, 0.0);
        EXPECT_EQ(trace.steps.back().reward, -10.0);
        EXPECT_EQ(trace.steps.back().belief, 0u);
    }
}

TEST(SimulateRun, CamoNominalEarnsNothing) {
    const auto bundle = build_camo_scenario(CamoConfig{});
    const auto trace = simulate_run(bundle, StatePolicy{bundle.nominal_policy(300)}, 300, 3);
    for (const auto& step : trace.steps) EXPECT_EQ(step.reward, 0.0) << "t " << step.t;
}

TEST(SimulateRun, SameSeedSameTrace) {
    CopsSetup s;
    const auto plan = plan_optimal_deception(s.product, 400);
    const auto a = simulate_run(s.bundle, BeliefPolicy{plan.policy}, 400, 41);
    const auto b = simulate_run(s.bundle, BeliefPolicy{plan.policy}, 400, 41);
    EXPECT_EQ(a.steps, b.steps);
    const auto c = simulate_run(s.bundle, BeliefPolicy{plan.policy}, 400, 42);
    EXPECT_NE(a.steps, c.steps);
}

TEST(SimulateRun, RewardsMatchModelAndCurveIsBounded) {
    CopsSetup s;
    const int T = 500;
    const auto plan = plan_optimal_deception(s.product, T);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto trace = simulate_run(s.bundle, BeliefPolicy{plan.policy}, T, seed);
        for (const auto& step : trace.steps) {
            ASSERT_TRUE(s.bundle.agent.is_permissible(step.state, step.action));
            EXPECT_EQ(step.reward, s.bundle.reward.at(step.state, step.belief, step.action));
        }
        const auto curve = average_reward_curve(trace);
        for (std::size_t k = 0; k < curve.size(); ++k) {
            const double tp = static_cast<double>(k + 1);
            EXPECT_LE(std::abs(curve[k]), 10.0 * (tp + 1.0) / tp + 1e-12);
        }
    }
}

TEST(SimulateRun, RejectsHorizonMismatch) {
    CopsSetup s;
    const auto plan = plan_optimal_deception(s.product, 10);
    EXPECT_THROW(simulate_run(s.bundle, BeliefPolicy{plan.policy}, 20, 0), std::invalid_argument);
}

TEST(MonteCarlo, SingleRunHasZeroSpread) {
    CopsSetup s;
    const auto stats = monte_carlo(s.bundle, StatePolicy{s.bundle.nominal_policy(100)}, 1, 100, 0);
    ASSERT_EQ(stats.mean.size(), 100u);
    for (double v : stats.stddev) EXPECT_EQ(v, 0.0);
}

TEST(MonteCarlo, IndependentOfThreadCount) {
    CopsSetup s;
    const auto plan = plan_optimal_deception(s.product, 300);
    const Controller ctrl = BeliefPolicy{plan.policy};
    const auto one = monte_carlo(s.bundle, ctrl, 24, 300, 9, 1);
    const auto many = monte_carlo(s.bundle, ctrl, 24, 300, 9, 5);
    EXPECT_EQ(one.mean, many.mean);
    EXPECT_EQ(one.stddev, many.stddev);
}

TEST(MonteCarlo, MeanMatchesIndividualRuns) {
    CopsSetup s;
    const auto plan = plan_optimal_deception(s.product, 200);
    const Controller ctrl = BeliefPolicy{plan.policy};
    const auto stats = monte_carlo(s.bundle, ctrl, 4, 200, 100, 2);
    double total = 0.0;
    for (std::uint64_t i = 0; i < 4; ++i) {
        total += average_reward_curve(simulate_run(s.bundle, ctrl, 200, 100 + i)).back();
    }
    EXPECT_NEAR(stats.terminal_mean(), total / 4.0, 1e-12);
}

TEST(WriteStatsCsv, HeaderAndRowCount) {
    CopsSetup s;
    const auto stats = monte_carlo(s.bundle, StatePolicy{s.bundle.nominal_policy(20)}, 3, 20, 0);
    std::ostringstream out;
    write_stats_csv(out, stats);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,mean_avg_reward,std_avg_reward");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 20);
}

TEST(WriteTraceJsonl, OneObjectPerStep) {
    std::ostringstream out;
    write_trace_jsonl(out, trace_of({0, 10, -10}));
    std::istringstream in(out.str());
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        EXPECT_NE(line.find("\"reward\""), std::string::npos);
        ++lines;
    }
    EXPECT_EQ(lines, 3);
}

TEST(MismatchSweep, ZeroDeltaAtPlanningParameter) {
    const CopsConfig cfg;
    const auto rows = mismatch_sweep(cfg, 0.1, {0.1}, 10, 300, 0);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].delta, 0.0);
    EXPECT_EQ(rows[0].matched_mean, rows[0].mismatched_mean);
}

TEST(DefaultThreadCount, HonorsEnvironment) {
    ::setenv("DECEPTIVE_PLANNER_THREADS", "3", 1);
    EXPECT_EQ(default_thread_count(), 3u);
    ::unsetenv("DECEPTIVE_PLANNER_THREADS");
    EXPECT_GE(default_thread_count(), 1u);
}
