#include "deceptive/belief_product.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace deceptive {

BeliefKernel::BeliefKernel(std::size_t state_count, std::size_t belief_count,
                           std::size_t action_count)
    : state_count_(state_count),
      belief_count_(belief_count),
      action_count_(action_count),
      table_(state_count * belief_count * action_count) {}

BeliefKernel BeliefKernel::from_generator(const Mdp& agent, std::size_t belief_count,
                                          const Generator& gen) {
    BeliefKernel k(agent.state_count(), belief_count, agent.action_count());
    for (StateId s = 0; s < agent.state_count(); ++s) {
        for (BeliefId b = 0; b < belief_count; ++b) {
            for (ActionId a : agent.permissible(s)) k.set(s, b, a, gen(s, b, a));
        }
    }
    return k;
}

BeliefReward::BeliefReward(std::size_t state_count, std::size_t belief_count,
                           std::size_t action_count)
    : state_count_(state_count),
      belief_count_(belief_count),
      action_count_(action_count),
      table_(state_count * belief_count * action_count,
             std::numeric_limits<double>::quiet_NaN()) {}

BeliefReward BeliefReward::from_generator(const Mdp& agent, std::size_t belief_count,
                                          const Generator& gen) {
    BeliefReward r(agent.state_count(), belief_count, agent.action_count());
    for (StateId s = 0; s < agent.state_count(); ++s) {
        for (BeliefId b = 0; b < belief_count; ++b) {
            for (ActionId a : agent.permissible(s)) r.set(s, b, a, gen(s, b, a));
        }
    }
    return r;
}

namespace {

std::string triple(StateId s, BeliefId b, ActionId a) {
    return "(s=" + std::to_string(s) + ", B=" + std::to_string(b) + ", a=" + std::to_string(a) +
           ")";
}

}  // namespace

ProductMdp build_product_mdp(const Mdp& agent, const BeliefKernel& kernel,
                             const BeliefReward& reward) {
    if (auto report = validate_mdp(agent); !report.empty()) throw InvalidMdpError(std::move(report));
    const std::size_t nS = agent.state_count();
    const std::size_t nB = kernel.belief_count();
    if (nB == 0) throw ProductBuildError("belief set is empty");
    if (kernel.state_count() != nS || kernel.action_count() != agent.action_count()) {
        throw ProductBuildError("belief kernel dimensions do not match the agent MDP");
    }
    if (reward.state_count() != nS || reward.belief_count() != nB ||
        reward.action_count() != agent.action_count()) {
        throw ProductBuildError("belief reward dimensions do not match the agent MDP");
    }

    ProductMdp product{Mdp(nS * nB, agent.action_count()), nS, nB};
    for (StateId s = 0; s < nS; ++s) {
        for (BeliefId b = 0; b < nB; ++b) {
            const StateId x = product.index(s, b);
            product.mdp.set_permissible(x, agent.permissible(s));
            for (ActionId a : agent.permissible(s)) {
                const auto& beliefs = kernel.at(s, b, a);
                if (beliefs.empty()) {
                    throw ProductBuildError("missing belief kernel entry at " + triple(s, b, a));
                }
                const double mass = total_mass(beliefs);
                if (std::abs(mass - 1.0) > kNormalizationTolerance) {
                    throw ProductBuildError("belief kernel row " + triple(s, b, a) +
                                            " sums to " + std::to_string(mass));
                }
                const double r = reward.at(s, b, a);
                if (!std::isfinite(r)) {
                    throw ProductBuildError("missing or non-finite reward at " + triple(s, b, a));
                }
                Distribution row;
                row.reserve(agent.transition(s, a).size() * beliefs.size());
                for (const auto& next_state : agent.transition(s, a)) {
                    for (const auto& next_belief : beliefs) {
                        if (next_belief.index >= nB) {
                            throw ProductBuildError("belief index out of range at " +
                                                    triple(s, b, a));
                        }
                        const double prob = next_state.probability * next_belief.probability;
                        if (prob == 0.0) continue;
                        row.push_back({product.index(next_state.index, next_belief.index), prob});
                    }
                }
                if (std::abs(total_mass(row) - 1.0) > kNormalizationTolerance) {
                    throw ProductBuildError("product row " + triple(s, b, a) +
                                            " does not normalize");
                }
                product.mdp.set_transition(x, a, std::move(row));
                product.mdp.set_reward(x, a, r);
            }
        }
    }
    return product;
}

InfeasibleConstraintError::InfeasibleConstraintError(StateId product_state, StateId agent_state,
                                                     BeliefId belief)
    : std::runtime_error("constraint leaves no permissible action at agent state " +
                         std::to_string(agent_state) + " with belief " + std::to_string(belief)),
      product_state_(product_state),
      agent_state_(agent_state),
      belief_(belief) {}

ProductMdp apply_forbidden_states(const ProductMdp& product, const std::set<StateId>& forbidden,
                                  const std::vector<StateId>& starts) {
    if (forbidden.empty()) return product;

    const auto& mdp = product.mdp;
    const std::size_t n = mdp.state_count();
    auto is_forbidden = [&](StateId x) { return forbidden.contains(product.agent_state(x)); };

    std::vector<std::vector<ActionId>> masked(n);
    for (StateId x = 0; x < n; ++x) {
        if (is_forbidden(x)) continue;
        for (ActionId a : mdp.permissible(x)) {
            bool enters = false;
            for (const auto& o : mdp.transition(x, a)) {
                if (o.probability > 0.0 && is_forbidden(o.index)) {
                    enters = true;
                    break;
                }
            }
            if (!enters) masked[x].push_back(a);
        }
    }

    auto fail = [&](StateId x) {
        throw InfeasibleConstraintError(x, product.agent_state(x), product.belief(x));
    };

    if (starts.empty()) {
        for (StateId x = 0; x < n; ++x) {
            if (!is_forbidden(x) && masked[x].empty()) fail(x);
        }
    } else {
        std::vector<bool> reached(n, false);
        std::vector<StateId> frontier;
        for (StateId x : starts) {
            if (is_forbidden(x)) fail(x);
            if (!reached[x]) {
                reached[x] = true;
                frontier.push_back(x);
            }
        }
        while (!frontier.empty()) {
            const StateId x = frontier.back();
            frontier.pop_back();
            if (masked[x].empty()) fail(x);
            for (ActionId a : masked[x]) {
                for (const auto& o : mdp.transition(x, a)) {
                    if (o.probability > 0.0 && !reached[o.index]) {
                        reached[o.index] = true;
                        frontier.push_back(o.index);
                    }
                }
            }
        }
    }

    ProductMdp result = product;
    for (StateId x = 0; x < n; ++x) {
        if (!is_forbidden(x) && !masked[x].empty()) result.mdp.set_permissible(x, masked[x]);
    }
    return result;
}

}  // namespace deceptive
