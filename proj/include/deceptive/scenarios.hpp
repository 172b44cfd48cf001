#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "deceptive/belief_product.hpp"
#include "deceptive/mdp.hpp"
#include "deceptive/planners.hpp"

namespace deceptive {

/// Grid tile; row 0 is the bottom row.
struct GridCell {
    int col = 0;
    int row = 0;
    friend bool operator==(const GridCell&, const GridCell&) = default;
};

int taxicab_distance(GridCell u, GridCell v);

enum class Move : ActionId { north = 0, south = 1, west = 2, east = 3, stay = 4 };
inline constexpr std::size_t kMoveCount = 5;

const char* move_name(Move m);

/// Row-major cell indexing: state = row * width + col.
struct Grid {
    int width = 0;
    int height = 0;

    std::size_t cell_count() const { return static_cast<std::size_t>(width) * height; }
    bool contains(GridCell c) const {
        return c.col >= 0 && c.col < width && c.row >= 0 && c.row < height;
    }
    StateId state(GridCell c) const { return static_cast<StateId>(c.row * width + c.col); }
    GridCell cell(StateId s) const {
        return {static_cast<int>(s) % width, static_cast<int>(s) / width};
    }
    static GridCell step(GridCell c, Move m);
};

class ScenarioConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Adversary belief at time 0: a fixed belief or uniform over the belief
/// set, drawn from each run's rng stream.
struct InitialBelief {
    std::optional<BeliefId> fixed;
    static InitialBelief uniform() { return {}; }
    static InitialBelief of(BeliefId b) { return {b}; }
};

struct CopsConfig {
    int width = 8;
    int height = 8;
    GridCell start{0, 7};
    std::vector<GridCell> goals{{5, 4}, {6, 5}, {4, 3}};
    std::size_t true_goal_index = 0;
    double p = 0.1;
    double reward_plus = 10.0;
    double reward_minus = -10.0;
    InitialBelief initial_belief = InitialBelief::uniform();

    void validate() const;
};

struct CamoConfig {
    int width = 5;
    int height = 5;
    GridCell start{0, 0};
    GridCell tg{1, 2};
    double p = 0.1;
    double r = 1.0;
    double c = 5.0;
    /// Defaults to the start cell (the adversary initially sees the agent).
    std::optional<GridCell> initial_belief;

    void validate() const;
};

using ScenarioConfig = std::variant<CopsConfig, CamoConfig>;

/// Everything needed to plan on and simulate one scenario.
struct ScenarioBundle {
    std::string kind;
    Grid grid;
    Mdp agent;
    BeliefKernel kernel;
    BeliefReward reward;
    /// Stationary nominal action per agent state.
    std::vector<ActionId> nominal;
    StateId start = 0;
    InitialBelief initial_belief;

    std::size_t belief_count() const { return kernel.belief_count(); }
    Policy nominal_policy(int horizon) const { return Policy::stationary(nominal, horizon); }
};

// Cops and deceptive robbers ------------------------------------------------

/// P(B_{t+1} = i) for every goal index i. Beliefs index `goals`.
Distribution cops_belief_transition(GridCell s, BeliefId b, Move a,
                                    const std::vector<GridCell>& goals, double p);

double cops_reward(GridCell s, BeliefId b, const CopsConfig& cfg);

/// Agent gridworld with five moves; moves off the grid are not permissible.
Mdp build_grid_mdp(const Grid& grid, std::size_t gesture_count = 1);

BeliefKernel cops_kernel(const CopsConfig& cfg, const Mdp& agent);
BeliefReward cops_belief_reward(const CopsConfig& cfg, const Mdp& agent);
/// Reward family where the undetected-goal reward ranges over [low, high].
RewardFamily cops_reward_family(const CopsConfig& cfg, const Mdp& agent, double low,
                                double high);
/// Kernel family parameterized by p over [low, high].
IntervalKernelFamily cops_kernel_family(const CopsConfig& cfg, const Mdp& agent, double low,
                                        double high);

ScenarioBundle build_cops_scenario(const CopsConfig& cfg);

// Camouflage ----------------------------------------------------------------

/// Camouflage actions: index = move + kMoveCount * camo, camo in {0, 1}.
struct CamoAction {
    Move move;
    bool camo;
};
CamoAction decode_camo_action(ActionId a);
ActionId encode_camo_action(Move m, bool camo);

/// Beliefs index grid cells with the same row-major numbering as states.
Distribution camo_belief_transition(GridCell s, GridCell b, CamoAction a, double p,
                                    const Grid& grid);

double camo_nominal_reward(GridCell s, const CamoConfig& cfg);
double camo_reward(GridCell s, GridCell b, CamoAction a, const CamoConfig& cfg);

BeliefKernel camo_kernel(const CamoConfig& cfg, const Mdp& agent);
BeliefReward camo_belief_reward(const CamoConfig& cfg, const Mdp& agent);
IntervalKernelFamily camo_kernel_family(const CamoConfig& cfg, const Mdp& agent, double low,
                                        double high);

ScenarioBundle build_camo_scenario(const CamoConfig& cfg);

ScenarioBundle build_scenario(const ScenarioConfig& cfg);

}  // namespace deceptive
