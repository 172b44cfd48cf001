#pragma once

#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "deceptive/mdp.hpp"

namespace deceptive {

using BeliefId = std::uint32_t;

/// Memoryless adversary learning rule f(s, B, a) -> distribution over B'.
/// Entries are stored densely; an empty distribution means "undefined".
class BeliefKernel {
public:
    using Generator = std::function<Distribution(StateId, BeliefId, ActionId)>;

    BeliefKernel() = default;
    BeliefKernel(std::size_t state_count, std::size_t belief_count, std::size_t action_count);

    /// Fills every (s, B, a) with a permissible `a` in `agent` from `gen`.
    static BeliefKernel from_generator(const Mdp& agent, std::size_t belief_count,
                                       const Generator& gen);

    std::size_t state_count() const { return state_count_; }
    std::size_t belief_count() const { return belief_count_; }
    std::size_t action_count() const { return action_count_; }

    const Distribution& at(StateId s, BeliefId b, ActionId a) const { return table_[slot(s, b, a)]; }
    void set(StateId s, BeliefId b, ActionId a, Distribution dist) {
        table_[slot(s, b, a)] = std::move(dist);
    }

private:
    std::size_t slot(StateId s, BeliefId b, ActionId a) const {
        return (static_cast<std::size_t>(s) * belief_count_ + b) * action_count_ + a;
    }

    std::size_t state_count_ = 0;
    std::size_t belief_count_ = 0;
    std::size_t action_count_ = 0;
    std::vector<Distribution> table_;
};

/// Belief-induced reward L(s, B, a). NaN marks an undefined entry.
class BeliefReward {
public:
    using Generator = std::function<double(StateId, BeliefId, ActionId)>;

    BeliefReward() = default;
    BeliefReward(std::size_t state_count, std::size_t belief_count, std::size_t action_count);

    static BeliefReward from_generator(const Mdp& agent, std::size_t belief_count,
                                       const Generator& gen);

    std::size_t state_count() const { return state_count_; }
    std::size_t belief_count() const { return belief_count_; }
    std::size_t action_count() const { return action_count_; }

    double at(StateId s, BeliefId b, ActionId a) const { return table_[slot(s, b, a)]; }
    void set(StateId s, BeliefId b, ActionId a, double value) { table_[slot(s, b, a)] = value; }

private:
    std::size_t slot(StateId s, BeliefId b, ActionId a) const {
        return (static_cast<std::size_t>(s) * belief_count_ + b) * action_count_ + a;
    }

    std::size_t state_count_ = 0;
    std::size_t belief_count_ = 0;
    std::size_t action_count_ = 0;
    std::vector<double> table_;
};

/// MDP on S x B with s-major indexing x = s * belief_count + B.
struct ProductMdp {
    Mdp mdp;
    std::size_t agent_state_count = 0;
    std::size_t belief_count = 0;

    StateId index(StateId s, BeliefId b) const {
        return static_cast<StateId>(s * belief_count + b);
    }
    StateId agent_state(StateId x) const { return static_cast<StateId>(x / belief_count); }
    BeliefId belief(StateId x) const { return static_cast<BeliefId>(x % belief_count); }
};

class ProductBuildError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Builds the product dynamics P(s,a,s') * f(s,B,a,B') with reward L(s,B,a).
/// Throws ProductBuildError on missing kernel/reward entries or rows that do
/// not normalize, InvalidMdpError when `agent` itself is invalid.
ProductMdp build_product_mdp(const Mdp& agent, const BeliefKernel& kernel,
                             const BeliefReward& reward);

class InfeasibleConstraintError : public std::runtime_error {
public:
    InfeasibleConstraintError(StateId product_state, StateId agent_state, BeliefId belief);
    StateId product_state() const { return product_state_; }
    StateId agent_state() const { return agent_state_; }
    BeliefId belief() const { return belief_; }

private:
    StateId product_state_;
    StateId agent_state_;
    BeliefId belief_;
};

/// Masks every action that enters a forbidden agent state with positive
/// probability. Feasibility is checked on states reachable from `starts`
/// under the masked dynamics, or on every non-forbidden state when `starts`
/// is empty. Forbidden states and unreachable dead ends keep their original
/// action sets. Throws InfeasibleConstraintError naming the first dead end.
ProductMdp apply_forbidden_states(const ProductMdp& product, const std::set<StateId>& forbidden,
                                  const std::vector<StateId>& starts = {});

}  // namespace deceptive
