#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "deceptive/belief_product.hpp"
#include "deceptive/mdp.hpp"

namespace deceptive {

/// Optimal deceptive policy with full knowledge of the belief dynamics,
/// rewards and beliefs. Memoryless in (s_t, B_t, t).
PlanResult plan_optimal_deception(const ProductMdp& product, int horizon);

// ---------------------------------------------------------------------------
// Planning without belief observations

/// Agent-side distribution over the adversary's belief.
using BeliefDistribution = std::vector<double>;

BeliefDistribution uniform_belief(std::size_t belief_count);
BeliefDistribution point_belief(std::size_t belief_count, BeliefId b);

/// Pr'(B) = sum_{B'} Pr(B') f(s, B', a, B), renormalized.
BeliefDistribution update_belief_distribution(const BeliefDistribution& pr, StateId s,
                                              ActionId a, const BeliefKernel& kernel);

enum class NoObsMode { randomized, weighted_argmax };

std::string to_string(NoObsMode mode);
std::optional<NoObsMode> parse_no_obs_mode(const std::string& text);

class UninitializedControllerError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Runtime controller for the mixed-observability case. Acts from the
/// full-observation plan while tracking a belief distribution. Copies share
/// the immutable plan; each copy owns its own distribution.
class NoObsController {
public:
    NoObsController(ProductMdp product, BeliefKernel kernel, PlanResult plan,
                    NoObsMode mode = NoObsMode::randomized);

    /// Starts a run with the given prior. Must precede act().
    void reset(BeliefDistribution initial);
    /// Starts a run with the uniform prior.
    void reset();

    ActionId act(StateId s, int t, std::mt19937_64& rng) const;
    /// Propagates the tracked distribution through the belief kernel.
    void update(StateId s, ActionId a);
    /// The belief was observed directly: collapse onto it.
    void observe(BeliefId b);

    bool initialized() const { return initialized_; }
    const BeliefDistribution& distribution() const { return pr_; }
    NoObsMode mode() const { return mode_; }
    int horizon() const { return shared_->plan.policy.horizon(); }
    std::size_t belief_count() const { return shared_->product.belief_count; }

private:
    struct Shared {
        ProductMdp product;
        BeliefKernel kernel;
        PlanResult plan;
    };
    std::shared_ptr<const Shared> shared_;
    NoObsMode mode_;
    BeliefDistribution pr_;
    bool initialized_ = false;
};

ActionId act_without_belief_obs(const NoObsController& ctrl, StateId s, int t,
                                std::mt19937_64& rng);

/// Draws an index from a probability vector using one 53-bit uniform.
std::size_t sample_index(const std::vector<double>& weights, std::mt19937_64& rng);
double uniform01(std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Robust planning under uncertain belief dynamics

/// Kernel family given by a one-dimensional parameter interval, every kernel
/// entry being affine in the parameter.
struct IntervalKernelFamily {
    std::string parameter;
    double low = 0.0;
    double high = 0.0;
    std::function<BeliefKernel(double)> generator;
};

using KernelFamily = std::variant<std::vector<BeliefKernel>, IntervalKernelFamily>;

class KernelFamilyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The kernels the inner minimum ranges over: the list itself, or the two
/// endpoint kernels of an interval family after the affinity check.
std::vector<BeliefKernel> family_extreme_kernels(const KernelFamily& family);

/// Checks that every entry of the interval family lies on the segment
/// between its endpoint values at the interval midpoint. Returns the largest
/// deviation found.
double interval_affinity_defect(const IntervalKernelFamily& family);

inline constexpr double kAffinityTolerance = 1e-9;

/// Lowest-index action maximizing min_k q_value(member_k, x, a, next).
struct RobustChoice {
    ActionId action;
    double value;
};
RobustChoice robust_choice(const std::vector<ProductMdp>& members, StateId x,
                           const double* next_values);

/// Robust backward induction with the adversary choosing a member kernel
/// independently at every stage and state.
PlanResult plan_robust_dynamics(const Mdp& agent, const KernelFamily& family,
                                const BeliefReward& reward, int horizon,
                                const std::set<StateId>& forbidden = {},
                                const std::vector<StateId>& starts = {});

/// Same recursion over already-built members sharing one state/action layout.
PlanResult robust_backward_induction(const std::vector<ProductMdp>& members, int horizon);

// ---------------------------------------------------------------------------
// Robust planning under uncertain rewards

/// Per-triple reward sets, represented by their lower and upper bounds.
class RewardFamily {
public:
    RewardFamily(BeliefReward low, BeliefReward high);
    /// Degenerate family containing exactly one reward function.
    explicit RewardFamily(const BeliefReward& single);

    const BeliefReward& low() const { return low_; }
    const BeliefReward& high() const { return high_; }
    /// inf L(s, B, a) for every triple.
    const BeliefReward& infimum() const { return low_; }

private:
    BeliefReward low_;
    BeliefReward high_;
};

class UnboundedRewardError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Optimal deception on the product built with L := inf L. Throws
/// UnboundedRewardError when some permissible triple has no finite infimum.
PlanResult plan_robust_rewards(const Mdp& agent, const BeliefKernel& kernel,
                               const RewardFamily& family, int horizon,
                               const std::set<StateId>& forbidden = {},
                               const std::vector<StateId>& starts = {});

}  // namespace deceptive
