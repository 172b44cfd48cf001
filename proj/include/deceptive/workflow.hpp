#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "deceptive/scenarios.hpp"
#include "deceptive/sim.hpp"

namespace deceptive {

enum class PlannerKind { optimal, robust_dynamics, robust_rewards, no_obs, nominal };

std::string to_string(PlannerKind kind);
std::optional<PlannerKind> parse_planner_kind(const std::string& text);

struct Interval {
    double low;
    double high;
};

struct PlannerOptions {
    PlannerKind kind = PlannerKind::optimal;
    int horizon = 2000;
    std::vector<GridCell> forbidden;
    std::optional<Interval> p_interval;
    std::optional<Interval> reward_interval;
    NoObsMode no_obs_mode = NoObsMode::randomized;
};

/// Scenario plus the options carried by its document.
struct LoadedScenario {
    ScenarioConfig config;
    std::vector<GridCell> forbidden;
};

LoadedScenario parse_scenario(const nlohmann::json& doc);
LoadedScenario load_scenario(const std::filesystem::path& path);
nlohmann::json scenario_to_json(const ScenarioConfig& cfg);

/// Resolves "c,r" cells and 1-based "G<k>" goal references separated by ';'.
std::vector<GridCell> parse_forbidden(const std::string& text, const ScenarioConfig& cfg);

/// A ready-to-simulate controller plus the plan that produced it.
struct PlannedController {
    Controller controller;
    std::optional<PlanResult> plan;
    PlannerOptions options;
};

/// Runs the requested planner on the bundle built from `cfg`. Throws
/// ScenarioConfigError, InfeasibleConstraintError, or the numeric errors of
/// the planning layer.
PlannedController plan_controller(const ScenarioConfig& cfg, const ScenarioBundle& bundle,
                                  const PlannerOptions& options);

// Policy documents ------------------------------------------------------------

nlohmann::json policy_to_json(const PlannedController& planned, const ScenarioBundle& bundle);

/// Rebuilds the controller a policy document describes for `bundle`.
PlannedController policy_from_json(const nlohmann::json& doc, const ScenarioBundle& bundle);

}  // namespace deceptive
