#include "deceptive/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace deceptive {

int taxicab_distance(GridCell u, GridCell v) {
    return std::abs(u.col - v.col) + std::abs(u.row - v.row);
}

const char* move_name(Move m) {
    switch (m) {
        case Move::north: return "north";
        case Move::south: return "south";
        case Move::west: return "west";
        case Move::east: return "east";
        case Move::stay: return "stay";
    }
    return "?";
}

GridCell Grid::step(GridCell c, Move m) {
    switch (m) {
        case Move::north: return {c.col, c.row + 1};
        case Move::south: return {c.col, c.row - 1};
        case Move::west: return {c.col - 1, c.row};
        case Move::east: return {c.col + 1, c.row};
        case Move::stay: return c;
    }
    return c;
}

Mdp build_grid_mdp(const Grid& grid, std::size_t gesture_count) {
    Mdp mdp(grid.cell_count(), kMoveCount * gesture_count);
    for (StateId s = 0; s < grid.cell_count(); ++s) {
        const GridCell here = grid.cell(s);
        std::vector<ActionId> allowed;
        for (std::size_t g = 0; g < gesture_count; ++g) {
            for (ActionId m = 0; m < kMoveCount; ++m) {
                const GridCell next = Grid::step(here, static_cast<Move>(m));
                if (!grid.contains(next)) continue;
                const auto a = static_cast<ActionId>(m + kMoveCount * g);
                allowed.push_back(a);
                mdp.set_transition(s, a, {{grid.state(next), 1.0}});
            }
        }
        mdp.set_permissible(s, std::move(allowed));
    }
    return mdp;
}

namespace {

void check_grid(int width, int height) {
    if (width <= 0 || height <= 0) throw ScenarioConfigError("grid dimensions must be positive");
}

void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ScenarioConfigError(std::string(name) + " must lie in [0, 1]");
    }
}

/// Shortest-path move toward `target`; ties go to the lowest move index.
Move greedy_move(const Grid& grid, GridCell from, GridCell target) {
    const int d = taxicab_distance(from, target);
    for (ActionId m = 0; m < kMoveCount; ++m) {
        const GridCell next = Grid::step(from, static_cast<Move>(m));
        if (grid.contains(next) && taxicab_distance(next, target) < d) return static_cast<Move>(m);
    }
    return Move::stay;
}

}  // namespace

// ---------------------------------------------------------------------------

void CopsConfig::validate() const {
    check_grid(width, height);
    const Grid grid{width, height};
    if (!grid.contains(start)) throw ScenarioConfigError("start cell outside the grid");
    if (goals.empty()) throw ScenarioConfigError("at least one goal is required");
    for (std::size_t i = 0; i < goals.size(); ++i) {
        if (!grid.contains(goals[i])) throw ScenarioConfigError("goal outside the grid");
        for (std::size_t j = 0; j < i; ++j) {
            if (goals[i] == goals[j]) throw ScenarioConfigError("goals must be distinct");
        }
    }
    if (true_goal_index >= goals.size()) throw ScenarioConfigError("true goal index out of range");
    check_probability(p, "p");
    if (!std::isfinite(reward_plus) || !std::isfinite(reward_minus)) {
        throw ScenarioConfigError("rewards must be finite");
    }
    if (initial_belief.fixed && *initial_belief.fixed >= goals.size()) {
        throw ScenarioConfigError("initial belief out of range");
    }
}

Distribution cops_belief_transition(GridCell s, BeliefId b, Move a,
                                    const std::vector<GridCell>& goals, double p) {
    const GridCell next = Grid::step(s, a);
    std::vector<bool> closer(goals.size(), false);
    std::size_t closer_count = 0;
    for (std::size_t i = 0; i < goals.size(); ++i) {
        if (taxicab_distance(next, goals[i]) < taxicab_distance(s, goals[i]) || next == goals[i]) {
            closer[i] = true;
            ++closer_count;
        }
    }
    Distribution dist;
    for (std::size_t i = 0; i < goals.size(); ++i) {
        double mass = 0.0;
        if (i == b) mass += 1.0 - p;
        if (closer[i]) {
            mass += p / static_cast<double>(closer_count);
        } else if (i == b && closer_count == 0) {
            mass += p;
        }
        if (mass > 0.0) dist.push_back({static_cast<std::uint32_t>(i), mass});
    }
    return dist;
}

double cops_reward(GridCell s, BeliefId b, const CopsConfig& cfg) {
    const GridCell tg = cfg.goals[cfg.true_goal_index];
    if (!(s == tg)) return 0.0;
    return cfg.goals.at(b) == tg ? cfg.reward_minus : cfg.reward_plus;
}

BeliefKernel cops_kernel(const CopsConfig& cfg, const Mdp& agent) {
    const Grid grid{cfg.width, cfg.height};
    return BeliefKernel::from_generator(agent, cfg.goals.size(), [&](StateId s, BeliefId b, ActionId a) {
        return cops_belief_transition(grid.cell(s), b, static_cast<Move>(a), cfg.goals, cfg.p);
    });
}

BeliefReward cops_belief_reward(const CopsConfig& cfg, const Mdp& agent) {
    const Grid grid{cfg.width, cfg.height};
    return BeliefReward::from_generator(agent, cfg.goals.size(), [&](StateId s, BeliefId b, ActionId) {
        return cops_reward(grid.cell(s), b, cfg);
    });
}

RewardFamily cops_reward_family(const CopsConfig& cfg, const Mdp& agent, double low,
                                double high) {
    if (!(low <= high)) throw ScenarioConfigError("reward interval has low > high");
    CopsConfig lo = cfg;
    lo.reward_plus = low;
    CopsConfig hi = cfg;
    hi.reward_plus = high;
    return RewardFamily(cops_belief_reward(lo, agent), cops_belief_reward(hi, agent));
}

IntervalKernelFamily cops_kernel_family(const CopsConfig& cfg, const Mdp& agent, double low,
                                        double high) {
    check_probability(low, "p interval low");
    check_probability(high, "p interval high");
    return {"p", low, high, [cfg, agent](double p) {
                CopsConfig c = cfg;
                c.p = p;
                return cops_kernel(c, agent);
            }};
}

ScenarioBundle build_cops_scenario(const CopsConfig& cfg) {
    cfg.validate();
    const Grid grid{cfg.width, cfg.height};
    ScenarioBundle bundle;
    bundle.kind = "cops";
    bundle.grid = grid;
    bundle.agent = build_grid_mdp(grid);
    const GridCell tg = cfg.goals[cfg.true_goal_index];
    for (StateId s = 0; s < grid.cell_count(); ++s) {
        for (ActionId a : bundle.agent.permissible(s)) {
            bundle.agent.set_reward(s, a, grid.cell(s) == tg ? cfg.reward_plus : 0.0);
        }
    }
    bundle.kernel = cops_kernel(cfg, bundle.agent);
    bundle.reward = cops_belief_reward(cfg, bundle.agent);
    bundle.nominal.resize(grid.cell_count());
    for (StateId s = 0; s < grid.cell_count(); ++s) {
        bundle.nominal[s] = static_cast<ActionId>(greedy_move(grid, grid.cell(s), tg));
    }
    bundle.start = grid.state(cfg.start);
    bundle.initial_belief = cfg.initial_belief;
    return bundle;
}

// ---------------------------------------------------------------------------

void CamoConfig::validate() const {
    check_grid(width, height);
    const Grid grid{width, height};
    if (!grid.contains(start)) throw ScenarioConfigError("start cell outside the grid");
    if (!grid.contains(tg)) throw ScenarioConfigError("target cell outside the grid");
    if (initial_belief && !grid.contains(*initial_belief)) {
        throw ScenarioConfigError("initial belief cell outside the grid");
    }
    check_probability(p, "p");
    if (!(r >= 0.0) || !std::isfinite(r)) throw ScenarioConfigError("r must be >= 0");
    if (!(c >= 0.0) || !std::isfinite(c)) throw ScenarioConfigError("c must be >= 0");
}

CamoAction decode_camo_action(ActionId a) {
    return {static_cast<Move>(a % kMoveCount), a >= kMoveCount};
}

ActionId encode_camo_action(Move m, bool camo) {
    return static_cast<ActionId>(m) + (camo ? static_cast<ActionId>(kMoveCount) : 0);
}

Distribution camo_belief_transition(GridCell s, GridCell b, CamoAction a, double p,
                                    const Grid& grid) {
    const GridCell next = Grid::step(s, a.move);
    const auto seen = static_cast<std::uint32_t>(grid.state(next));
    if (!a.camo || b == next) return {{seen, 1.0}};
    Distribution dist;
    if (p > 0.0) dist.push_back({seen, p});
    if (p < 1.0) dist.push_back({static_cast<std::uint32_t>(grid.state(b)), 1.0 - p});
    return dist;
}

double camo_nominal_reward(GridCell s, const CamoConfig& cfg) {
    return 10.0 / (taxicab_distance(s, cfg.tg) + 1.0);
}

double camo_reward(GridCell s, GridCell b, CamoAction a, const CamoConfig& cfg) {
    const double cost = a.camo ? cfg.c : 0.0;
    if (taxicab_distance(s, b) <= cfg.r) return -cost;
    return camo_nominal_reward(s, cfg) - cost;
}

BeliefKernel camo_kernel(const CamoConfig& cfg, const Mdp& agent) {
    const Grid grid{cfg.width, cfg.height};
    return BeliefKernel::from_generator(agent, grid.cell_count(), [&](StateId s, BeliefId b, ActionId a) {
        return camo_belief_transition(grid.cell(s), grid.cell(b), decode_camo_action(a), cfg.p, grid);
    });
}

BeliefReward camo_belief_reward(const CamoConfig& cfg, const Mdp& agent) {
    const Grid grid{cfg.width, cfg.height};
    return BeliefReward::from_generator(agent, grid.cell_count(), [&](StateId s, BeliefId b, ActionId a) {
        return camo_reward(grid.cell(s), grid.cell(b), decode_camo_action(a), cfg);
    });
}

IntervalKernelFamily camo_kernel_family(const CamoConfig& cfg, const Mdp& agent, double low,
                                        double high) {
    check_probability(low, "p interval low");
    check_probability(high, "p interval high");
    return {"p", low, high, [cfg, agent](double p) {
                CamoConfig c = cfg;
                c.p = p;
                return camo_kernel(c, agent);
            }};
}

ScenarioBundle build_camo_scenario(const CamoConfig& cfg) {
    cfg.validate();
    const Grid grid{cfg.width, cfg.height};
    ScenarioBundle bundle;
    bundle.kind = "camo";
    bundle.grid = grid;
    bundle.agent = build_grid_mdp(grid, 2);
    for (StateId s = 0; s < grid.cell_count(); ++s) {
        for (ActionId a : bundle.agent.permissible(s)) {
            bundle.agent.set_reward(s, a, camo_nominal_reward(grid.cell(s), cfg));
        }
    }
    bundle.kernel = camo_kernel(cfg, bundle.agent);
    bundle.reward = camo_belief_reward(cfg, bundle.agent);
    bundle.nominal.resize(grid.cell_count());
    for (StateId s = 0; s < grid.cell_count(); ++s) {
        bundle.nominal[s] = encode_camo_action(greedy_move(grid, grid.cell(s), cfg.tg), false);
    }
    bundle.start = grid.state(cfg.start);
    bundle.initial_belief = InitialBelief::of(grid.state(cfg.initial_belief.value_or(cfg.start)));
    return bundle;
}

ScenarioBundle build_scenario(const ScenarioConfig& cfg) {
    return std::visit(
        [](const auto& c) -> ScenarioBundle {
            if constexpr (std::is_same_v<std::decay_t<decltype(c)>, CopsConfig>) {
                return build_cops_scenario(c);
            } else {
                return build_camo_scenario(c);
            }
        },
        cfg);
}

}  // namespace deceptive
