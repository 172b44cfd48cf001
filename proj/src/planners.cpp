#include "deceptive/planners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace deceptive {

PlanResult plan_optimal_deception(const ProductMdp& product, int horizon) {
    return backward_induction(product.mdp, horizon);
}

// ---------------------------------------------------------------------------

BeliefDistribution uniform_belief(std::size_t belief_count) {
    return BeliefDistribution(belief_count, 1.0 / static_cast<double>(belief_count));
}

BeliefDistribution point_belief(std::size_t belief_count, BeliefId b) {
    BeliefDistribution pr(belief_count, 0.0);
    pr.at(b) = 1.0;
    return pr;
}

BeliefDistribution update_belief_distribution(const BeliefDistribution& pr, StateId s,
                                              ActionId a, const BeliefKernel& kernel) {
    BeliefDistribution next(pr.size(), 0.0);
    for (BeliefId prev = 0; prev < pr.size(); ++prev) {
        if (pr[prev] == 0.0) continue;
        for (const auto& o : kernel.at(s, prev, a)) next[o.index] += pr[prev] * o.probability;
    }
    double mass = 0.0;
    for (double v : next) mass += v;
    if (mass > 0.0) {
        for (double& v : next) v /= mass;
    }
    return next;
}

std::string to_string(NoObsMode mode) {
    return mode == NoObsMode::randomized ? "randomized" : "weighted-argmax";
}

std::optional<NoObsMode> parse_no_obs_mode(const std::string& text) {
    if (text == "randomized") return NoObsMode::randomized;
    if (text == "weighted-argmax") return NoObsMode::weighted_argmax;
    return std::nullopt;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t sample_index(const std::vector<double>& weights, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        acc += weights[i];
        last_positive = i;
        if (u < acc) return i;
    }
    // Rounding left u above the accumulated mass.
    return last_positive;
}

NoObsController::NoObsController(ProductMdp product, BeliefKernel kernel, PlanResult plan,
                                 NoObsMode mode)
    : shared_(std::make_shared<const Shared>(
          Shared{std::move(product), std::move(kernel), std::move(plan)})),
      mode_(mode) {}

void NoObsController::reset(BeliefDistribution initial) {
    if (initial.size() != belief_count()) {
        throw std::invalid_argument("initial belief distribution has wrong size");
    }
    double mass = 0.0;
    for (double v : initial) {
        if (!(v >= 0.0)) throw std::invalid_argument("negative belief probability");
        mass += v;
    }
    if (std::abs(mass - 1.0) > kNormalizationTolerance) {
        throw std::invalid_argument("initial belief distribution is not normalized");
    }
    pr_ = std::move(initial);
    initialized_ = true;
}

void NoObsController::reset() { reset(uniform_belief(belief_count())); }

ActionId NoObsController::act(StateId s, int t, std::mt19937_64& rng) const {
    if (!initialized_) throw UninitializedControllerError("controller used before reset()");
    const auto& product = shared_->product;
    const auto& plan = shared_->plan;
    if (t < 0 || t > plan.policy.horizon()) {
        throw std::out_of_range("time step outside the controller horizon");
    }
    if (mode_ == NoObsMode::randomized) {
        const auto b = static_cast<BeliefId>(sample_index(pr_, rng));
        return plan.policy.action(t, product.index(s, b));
    }

    // Actions permissible under every belief that still has mass.
    std::vector<ActionId> candidates;
    bool first = true;
    for (BeliefId b = 0; b < pr_.size(); ++b) {
        if (pr_[b] <= 0.0) continue;
        const auto& actions = product.mdp.permissible(product.index(s, b));
        if (first) {
            candidates = actions;
            first = false;
        } else {
            std::vector<ActionId> kept;
            std::set_intersection(candidates.begin(), candidates.end(), actions.begin(),
                                  actions.end(), std::back_inserter(kept));
            candidates.swap(kept);
        }
    }
    if (candidates.empty()) {
        const auto b = static_cast<BeliefId>(std::max_element(pr_.begin(), pr_.end()) - pr_.begin());
        candidates = product.mdp.permissible(product.index(s, b));
    }

    const double* next = plan.values.row_data(t + 1);
    ActionId best_action = candidates.front();
    double best = -std::numeric_limits<double>::infinity();
    for (ActionId a : candidates) {
        double q = 0.0;
        for (BeliefId b = 0; b < pr_.size(); ++b) {
            if (pr_[b] <= 0.0) continue;
            const StateId x = product.index(s, b);
            if (!product.mdp.is_permissible(x, a)) continue;
            q += pr_[b] * q_value(product.mdp, x, a, next);
        }
        if (q > best) {
            best = q;
            best_action = a;
        }
    }
    return best_action;
}

void NoObsController::update(StateId s, ActionId a) {
    if (!initialized_) throw UninitializedControllerError("controller used before reset()");
    pr_ = update_belief_distribution(pr_, s, a, shared_->kernel);
}

void NoObsController::observe(BeliefId b) {
    pr_ = point_belief(belief_count(), b);
    initialized_ = true;
}

ActionId act_without_belief_obs(const NoObsController& ctrl, StateId s, int t,
                                std::mt19937_64& rng) {
    return ctrl.act(s, t, rng);
}

// ---------------------------------------------------------------------------

namespace {

using DenseRow = std::map<std::uint32_t, double>;

DenseRow densify(const Distribution& dist) {
    DenseRow row;
    for (const auto& o : dist) row[o.index] += o.probability;
    return row;
}

void check_normalized(const BeliefKernel& kernel, const std::string& what) {
    for (StateId s = 0; s < kernel.state_count(); ++s) {
        for (BeliefId b = 0; b < kernel.belief_count(); ++b) {
            for (ActionId a = 0; a < kernel.action_count(); ++a) {
                const auto& dist = kernel.at(s, b, a);
                if (dist.empty()) continue;
                if (std::abs(total_mass(dist) - 1.0) > kNormalizationTolerance) {
                    throw KernelFamilyError(what + " is not normalized");
                }
            }
        }
    }
}

}  // namespace

double interval_affinity_defect(const IntervalKernelFamily& family) {
    const BeliefKernel lo = family.generator(family.low);
    const BeliefKernel hi = family.generator(family.high);
    const BeliefKernel mid = family.generator(0.5 * (family.low + family.high));
    double defect = 0.0;
    for (StateId s = 0; s < lo.state_count(); ++s) {
        for (BeliefId b = 0; b < lo.belief_count(); ++b) {
            for (ActionId a = 0; a < lo.action_count(); ++a) {
                DenseRow rl = densify(lo.at(s, b, a));
                DenseRow rh = densify(hi.at(s, b, a));
                DenseRow rm = densify(mid.at(s, b, a));
                std::map<std::uint32_t, bool> keys;
                for (const auto& [k, v] : rl) keys[k] = true;
                for (const auto& [k, v] : rh) keys[k] = true;
                for (const auto& [k, v] : rm) keys[k] = true;
                for (const auto& [k, unused] : keys) {
                    const double expected = 0.5 * (rl[k] + rh[k]);
                    defect = std::max(defect, std::abs(rm[k] - expected));
                }
            }
        }
    }
    return defect;
}

std::vector<BeliefKernel> family_extreme_kernels(const KernelFamily& family) {
    std::vector<BeliefKernel> kernels;
    if (const auto* list = std::get_if<std::vector<BeliefKernel>>(&family)) {
        if (list->empty()) throw KernelFamilyError("kernel family is empty");
        kernels = *list;
    } else {
        const auto& interval = std::get<IntervalKernelFamily>(family);
        if (!interval.generator) throw KernelFamilyError("interval family has no generator");
        if (!(interval.low <= interval.high)) {
            throw KernelFamilyError("interval family has low > high");
        }
        const double defect = interval_affinity_defect(interval);
        if (defect > kAffinityTolerance) {
            throw KernelFamilyError("kernel entries are not affine in '" + interval.parameter +
                                    "' (defect " + std::to_string(defect) + ")");
        }
        kernels.push_back(interval.generator(interval.low));
        if (interval.high != interval.low) kernels.push_back(interval.generator(interval.high));
    }
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        check_normalized(kernels[i], "family member " + std::to_string(i));
    }
    return kernels;
}

RobustChoice robust_choice(const std::vector<ProductMdp>& members, StateId x,
                           const double* next_values) {
    const auto& actions = members.front().mdp.permissible(x);
    RobustChoice best{actions.front(), -std::numeric_limits<double>::infinity()};
    for (ActionId a : actions) {
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& m : members) worst = std::min(worst, q_value(m.mdp, x, a, next_values));
        if (worst > best.value) best = {a, worst};
    }
    return best;
}

PlanResult robust_backward_induction(const std::vector<ProductMdp>& members, int horizon) {
    if (members.empty()) throw KernelFamilyError("kernel family is empty");
    if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
    const std::size_t n = members.front().mdp.state_count();
    for (const auto& m : members) {
        if (m.mdp.state_count() != n) throw KernelFamilyError("family members differ in size");
        if (auto report = validate_mdp(m.mdp); !report.empty()) {
            throw InvalidMdpError(std::move(report));
        }
        for (StateId x = 0; x < n; ++x) {
            if (m.mdp.permissible(x) != members.front().mdp.permissible(x)) {
                throw KernelFamilyError("family members differ in permissible actions");
            }
        }
    }

    PlanResult result{Policy(horizon, n), ValueTable(horizon, n)};
    for (int t = horizon; t >= 0; --t) {
        const double* next = result.values.row_data(t + 1);
        for (StateId x = 0; x < n; ++x) {
            const auto choice = robust_choice(members, x, next);
            result.values.value(t, x) = choice.value;
            result.policy.set_action(t, x, choice.action);
        }
    }
    return result;
}

PlanResult plan_robust_dynamics(const Mdp& agent, const KernelFamily& family,
                                const BeliefReward& reward, int horizon,
                                const std::set<StateId>& forbidden,
                                const std::vector<StateId>& starts) {
    std::vector<ProductMdp> members;
    for (const auto& kernel : family_extreme_kernels(family)) {
        members.push_back(
            apply_forbidden_states(build_product_mdp(agent, kernel, reward), forbidden, starts));
    }
    return robust_backward_induction(members, horizon);
}

// ---------------------------------------------------------------------------

RewardFamily::RewardFamily(BeliefReward low, BeliefReward high)
    : low_(std::move(low)), high_(std::move(high)) {}

RewardFamily::RewardFamily(const BeliefReward& single) : low_(single), high_(single) {}

PlanResult plan_robust_rewards(const Mdp& agent, const BeliefKernel& kernel,
                               const RewardFamily& family, int horizon,
                               const std::set<StateId>& forbidden,
                               const std::vector<StateId>& starts) {
    const auto& inf = family.infimum();
    if (inf.state_count() != agent.state_count() || inf.action_count() != agent.action_count()) {
        throw UnboundedRewardError("reward family dimensions do not match the agent MDP");
    }
    for (StateId s = 0; s < agent.state_count(); ++s) {
        for (BeliefId b = 0; b < inf.belief_count(); ++b) {
            for (ActionId a : agent.permissible(s)) {
                if (!std::isfinite(inf.at(s, b, a))) {
                    throw UnboundedRewardError("reward set at (s=" + std::to_string(s) +
                                               ", B=" + std::to_string(b) + ", a=" +
                                               std::to_string(a) + ") is not bounded below");
                }
            }
        }
    }
    auto product = apply_forbidden_states(build_product_mdp(agent, kernel, inf), forbidden, starts);
    return plan_optimal_deception(product, horizon);
}

}  // namespace deceptive
