#pragma once

#include <cstdint>
#include <iosfwd>
#include <variant>
#include <vector>

#include "deceptive/mdp.hpp"
#include "deceptive/planners.hpp"
#include "deceptive/scenarios.hpp"

namespace deceptive {

/// Policy over product states (the agent observes the adversary's belief).
struct BeliefPolicy {
    Policy policy;
};

/// Policy over agent states only; ignores the belief.
struct StatePolicy {
    Policy policy;
};

using Controller = std::variant<BeliefPolicy, StatePolicy, NoObsController>;

int controller_horizon(const Controller& controller);

struct StepRecord {
    int t;
    StateId state;
    BeliefId belief;
    ActionId action;
    double reward;
    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct SimTrace {
    std::uint64_t seed = 0;
    std::vector<StepRecord> steps;
};

/// One run of T+1 steps. The reward at step t is L(s_t, B_t, a_t). A uniform
/// initial belief is drawn from the run's rng before step 0; each transition
/// then samples s_{t+1} followed by B_{t+1}.
SimTrace simulate_run(const ScenarioBundle& bundle, const Controller& controller, int horizon,
                      std::uint64_t seed);

/// Entry T'-1 holds sum_{t=0}^{T'} r_t / T' for T' = 1 .. steps-1.
std::vector<double> average_reward_curve(const SimTrace& trace);

struct RunStats {
    std::size_t runs = 0;
    /// Index T'-1 for T' = 1 .. T.
    std::vector<double> mean;
    std::vector<double> stddev;

    double terminal_mean() const { return mean.empty() ? 0.0 : mean.back(); }
};

/// Worker-thread count: DECEPTIVE_PLANNER_THREADS if set, else hardware.
unsigned default_thread_count();

/// Runs `runs` simulations with seeds base_seed + i and aggregates their
/// running-average curves (population standard deviation).
RunStats monte_carlo(const ScenarioBundle& bundle, const Controller& controller, int runs,
                     int horizon, std::uint64_t base_seed, unsigned threads = 0);

struct SweepRow {
    double p_true;
    double delta;
    double matched_mean;
    double mismatched_mean;
};

/// For each p_true: terminal mean of the policy planned at p_true minus that
/// of the policy planned at p_plan, both simulated under p_true with the
/// same seeds.
std::vector<SweepRow> mismatch_sweep(const CopsConfig& cfg, double p_plan,
                                     const std::vector<double>& p_true_grid, int runs, int horizon,
                                     std::uint64_t base_seed, unsigned threads = 0);

void write_stats_csv(std::ostream& out, const RunStats& stats);
void write_trace_jsonl(std::ostream& out, const SimTrace& trace);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace deceptive
