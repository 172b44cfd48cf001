#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace deceptive {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;

/// Probability mass placed on one outcome index (a state or a belief).
struct Outcome {
    std::uint32_t index;
    double probability;
};

/// Sparse distribution over dense indices. Targets are unique.
using Distribution = std::vector<Outcome>;

inline constexpr double kNormalizationTolerance = 1e-9;

/// Finite-state, finite-action MDP with a stage reward and per-state
/// permissible action sets. Only (s, a) pairs with a permissible a carry a
/// transition distribution.
class Mdp {
public:
    Mdp() = default;
    Mdp(std::size_t state_count, std::size_t action_count);

    std::size_t state_count() const { return state_count_; }
    std::size_t action_count() const { return action_count_; }

    const Distribution& transition(StateId s, ActionId a) const {
        return kernel_[slot(s, a)];
    }
    double reward(StateId s, ActionId a) const { return reward_[slot(s, a)]; }
    const std::vector<ActionId>& permissible(StateId s) const { return permissible_[s]; }
    bool is_permissible(StateId s, ActionId a) const;

    void set_transition(StateId s, ActionId a, Distribution dist);
    void set_reward(StateId s, ActionId a, double value);
    /// Stored sorted ascending; duplicates removed.
    void set_permissible(StateId s, std::vector<ActionId> actions);

private:
    std::size_t slot(StateId s, ActionId a) const {
        return static_cast<std::size_t>(s) * action_count_ + a;
    }

    std::size_t state_count_ = 0;
    std::size_t action_count_ = 0;
    std::vector<Distribution> kernel_;
    std::vector<double> reward_;
    std::vector<std::vector<ActionId>> permissible_;
};

struct Violation {
    StateId state;
    ActionId action;  // equals action_count() for state-level violations
    std::string message;
};

using ValidationReport = std::vector<Violation>;

/// Checks stochasticity of every permissible row and that permissible sets
/// are nonempty and in range. Violations are returned, never thrown.
ValidationReport validate_mdp(const Mdp& mdp);

/// Sums the probabilities in a distribution.
double total_mass(const Distribution& dist);

class InvalidMdpError : public std::runtime_error {
public:
    explicit InvalidMdpError(ValidationReport report);
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

/// Time-indexed deterministic policy: action(t, s) for t in [0, horizon].
class Policy {
public:
    Policy() = default;
    Policy(int horizon, std::size_t state_count);

    /// Same action row at every stage.
    static Policy stationary(const std::vector<ActionId>& actions, int horizon);

    int horizon() const { return horizon_; }
    std::size_t state_count() const { return state_count_; }

    ActionId action(int t, StateId s) const { return table_[row(t) + s]; }
    void set_action(int t, StateId s, ActionId a) { table_[row(t) + s] = a; }

    const std::vector<ActionId>& table() const { return table_; }

    friend bool operator==(const Policy&, const Policy&) = default;

private:
    std::size_t row(int t) const { return static_cast<std::size_t>(t) * state_count_; }

    int horizon_ = 0;
    std::size_t state_count_ = 0;
    std::vector<ActionId> table_;
};

/// Finite-horizon values; row horizon+1 is identically zero.
class ValueTable {
public:
    ValueTable() = default;
    ValueTable(int horizon, std::size_t state_count);

    int horizon() const { return horizon_; }
    std::size_t state_count() const { return state_count_; }

    double value(int t, StateId s) const { return values_[row(t) + s]; }
    double& value(int t, StateId s) { return values_[row(t) + s]; }

    /// Contiguous view of stage t.
    const double* row_data(int t) const { return values_.data() + row(t); }

private:
    std::size_t row(int t) const { return static_cast<std::size_t>(t) * state_count_; }

    int horizon_ = 0;
    std::size_t state_count_ = 0;
    std::vector<double> values_;
};

struct PlanResult {
    Policy policy;
    ValueTable values;
};

/// reward(s, a) + sum_{s'} P(s, a, s') * next[s'].
double q_value(const Mdp& mdp, StateId s, ActionId a, const double* next_values);

/// Exact finite-horizon dynamic programming maximizing
/// E[sum_{t=0}^{T} reward(s_t, a_t)]. Ties go to the lowest action index.
/// Throws InvalidMdpError when validate_mdp reports violations.
PlanResult backward_induction(const Mdp& mdp, int horizon);

/// Exact expected total reward of `policy` over stages 0..horizon from
/// `start`, by forward propagation of the state distribution.
double evaluate_policy(const Mdp& mdp, const Policy& policy, int horizon, StateId start);

class BudgetExceededError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultPolicyBudget = 1e7;

/// Optimal expected total reward from `start` by enumerating every
/// time-dependent deterministic policy. Throws BudgetExceededError when the
/// number of policies exceeds `budget`.
double brute_force_plan(const Mdp& mdp, int horizon, StateId start,
                        double budget = kDefaultPolicyBudget);

}  // namespace deceptive
