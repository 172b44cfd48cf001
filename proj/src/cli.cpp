#include "deceptive/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "deceptive/workflow.hpp"

namespace deceptive {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct PlannerFlags {
    std::string planner = "optimal";
    std::string forbidden;
    std::optional<double> p_low, p_high, reward_low, reward_high;
    std::string no_obs_mode = "randomized";
};

void add_planner_flags(CLI::App* cmd, PlannerFlags& flags) {
    cmd->add_option("--planner", flags.planner,
                    "optimal | robust-dynamics | robust-rewards | no-obs | nominal");
    cmd->add_option("--forbidden", flags.forbidden,
                    "Forbidden agent cells, 'col,row' or 'G<k>' items separated by ';'");
    cmd->add_option("--p-low", flags.p_low, "Lower end of the learning-parameter interval");
    cmd->add_option("--p-high", flags.p_high, "Upper end of the learning-parameter interval");
    cmd->add_option("--reward-low", flags.reward_low, "Lower end of the goal-reward interval");
    cmd->add_option("--reward-high", flags.reward_high, "Upper end of the goal-reward interval");
    cmd->add_option("--no-obs-mode", flags.no_obs_mode, "randomized | weighted-argmax");
}

std::optional<Interval> interval(const std::optional<double>& lo, const std::optional<double>& hi,
                                 const char* name) {
    if (!lo && !hi) return std::nullopt;
    if (!lo || !hi) throw ScenarioConfigError(std::string(name) + " needs both ends");
    if (!(*lo <= *hi)) throw ScenarioConfigError(std::string(name) + " has low > high");
    return Interval{*lo, *hi};
}

PlannerOptions planner_options(const PlannerFlags& flags, const LoadedScenario& scenario, int horizon) {
    PlannerOptions options;
    const auto kind = parse_planner_kind(flags.planner);
    if (!kind) throw ScenarioConfigError("unknown planner '" + flags.planner + "'");
    options.kind = *kind;
    options.horizon = horizon;
    options.forbidden = scenario.forbidden;
    for (const auto& c : parse_forbidden(flags.forbidden, scenario.config)) options.forbidden.push_back(c);
    options.p_interval = interval(flags.p_low, flags.p_high, "p interval");
    options.reward_interval = interval(flags.reward_low, flags.reward_high, "reward interval");
    const auto mode = parse_no_obs_mode(flags.no_obs_mode);
    if (!mode) throw ScenarioConfigError("unknown no-obs mode '" + flags.no_obs_mode + "'");
    options.no_obs_mode = *mode;
    return options;
}

std::vector<double> parse_grid_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream items(text);
    std::string item;
    while (std::getline(items, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ScenarioConfigError("bad p grid value '" + item + "'");
        }
        if (used != item.size()) throw ScenarioConfigError("bad p grid value '" + item + "'");
        if (!(v >= 0.0 && v <= 1.0)) throw ScenarioConfigError("p grid values must lie in [0, 1]");
        values.push_back(v);
    }
    if (values.empty()) throw ScenarioConfigError("p grid is empty");
    return values;
}

void write_file(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ScenarioConfigError("cannot write " + path.string());
    out << contents;
}

int cmd_plan(const std::string& scenario_path, const PlannerFlags& flags, int horizon,
             const std::string& out_path, std::ostream& out) {
    const auto scenario = load_scenario(scenario_path);
    const auto bundle = build_scenario(scenario.config);
    const auto planned = plan_controller(scenario.config, bundle, planner_options(flags, scenario, horizon));
    const json doc = policy_to_json(planned, bundle);
    write_file(out_path, doc.dump() + "\n");
    out << fmt::format("planner={} horizon={} states={} out={}\n", to_string(planned.options.kind),
                       horizon, doc["state_count"].get<std::size_t>(), out_path);
    if (doc.contains("value_summary")) {
        const auto& v = doc["value_summary"];
        out << fmt::format("V0 mean over initial beliefs at start: {:.6f} (per step {:.6f})\n",
                           v["v0_mean"].get<double>(),
                           horizon > 0 ? v["v0_mean"].get<double>() / horizon : 0.0);
    }
    return kExitOk;
}

int cmd_simulate(const std::string& scenario_path, const PlannerFlags& flags,
                 std::optional<int> horizon, const std::string& policy_path, int runs,
                 std::uint64_t seed, const std::string& out_path, const std::string& trace_dir,
                 std::ostream& out) {
    if (runs < 1) throw ScenarioConfigError("--runs must be >= 1");
    const auto scenario = load_scenario(scenario_path);
    const auto bundle = build_scenario(scenario.config);
    PlannedController planned = [&] {
        if (!policy_path.empty()) {
            std::ifstream in(policy_path);
            if (!in) throw ScenarioConfigError("cannot open policy file " + policy_path);
            json doc;
            try {
                doc = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ScenarioConfigError(std::string("malformed policy file: ") + e.what());
            }
            return policy_from_json(doc, bundle);
        }
        return plan_controller(scenario.config, bundle,
                               planner_options(flags, scenario, horizon.value_or(2000)));
    }();
    const int T = horizon.value_or(controller_horizon(planned.controller));
    if (controller_horizon(planned.controller) < T) {
        throw ScenarioConfigError(fmt::format("policy horizon {} is shorter than requested horizon {}",
                                              controller_horizon(planned.controller), T));
    }

    const auto stats = monte_carlo(bundle, planned.controller, runs, T, seed);
    std::ostringstream csv;
    write_stats_csv(csv, stats);
    write_file(out_path, csv.str());
    if (!trace_dir.empty()) {
        for (int i = 0; i < runs; ++i) {
            const auto trace = simulate_run(bundle, planned.controller, T, seed + static_cast<std::uint64_t>(i));
            std::ostringstream lines;
            write_trace_jsonl(lines, trace);
            write_file(fs::path(trace_dir) / fmt::format("run_{:04d}.jsonl", i), lines.str());
        }
    }
    out << fmt::format("planner={} runs={} horizon={} terminal_mean={:.6f} terminal_std={:.6f}\n",
                       to_string(planned.options.kind), runs, T, stats.terminal_mean(),
                       stats.stddev.empty() ? 0.0 : stats.stddev.back());
    return kExitOk;
}

int cmd_sweep(const std::string& scenario_path, const std::string& grid_text,
              std::optional<double> p_plan, int runs, int horizon, std::uint64_t seed,
              const std::string& out_path, std::ostream& out) {
    if (runs < 1) throw ScenarioConfigError("--runs must be >= 1");
    const auto scenario = load_scenario(scenario_path);
    const auto* cops = std::get_if<CopsConfig>(&scenario.config);
    if (!cops) throw ScenarioConfigError("sweep is defined for the cops scenario");
    const auto grid = parse_grid_list(grid_text);
    const double plan_p = p_plan.value_or(cops->p);
    const auto rows = mismatch_sweep(*cops, plan_p, grid, runs, horizon, seed);
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    write_file(out_path, csv.str());
    for (const auto& r : rows) out << fmt::format("p_true={} delta={:.6f}\n", r.p_true, r.delta);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Deceptive planning on belief-augmented MDPs", "deceptive_planner"};
    app.require_subcommand(1);

    std::string scenario_path, out_path, policy_path, trace_dir, grid_text;
    PlannerFlags flags;
    int plan_horizon = 2000;
    std::optional<int> sim_horizon;
    int sweep_horizon = 2000;
    int runs = 100;
    std::uint64_t seed = 0;
    std::optional<double> p_plan;

    auto* plan = app.add_subcommand("plan", "Plan a policy and write it as JSON");
    plan->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    plan->add_option("--horizon", plan_horizon, "Horizon T");
    plan->add_option("--out", out_path, "Policy output path")->required();
    add_planner_flags(plan, flags);

    auto* sim = app.add_subcommand("simulate", "Monte-Carlo simulation to a stats CSV");
    sim->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    sim->add_option("--policy", policy_path, "Policy JSON written by 'plan'");
    sim->add_option("--horizon", sim_horizon, "Horizon T (default: policy horizon or 2000)");
    sim->add_option("--runs", runs, "Number of runs");
    sim->add_option("--seed", seed, "Base seed; run i uses seed + i");
    sim->add_option("--out", out_path, "Stats CSV output path")->required();
    sim->add_option("--trace-dir", trace_dir, "Directory for per-run JSONL traces");
    add_planner_flags(sim, flags);

    auto* sweep = app.add_subcommand("sweep", "Learning-parameter mismatch sweep (cops)");
    sweep->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    sweep->add_option("--p-grid", grid_text, "Comma-separated true p values")->required();
    sweep->add_option("--p-plan", p_plan, "p assumed by the fixed policy (default: scenario p)");
    sweep->add_option("--runs", runs, "Runs per grid point");
    sweep->add_option("--horizon", sweep_horizon, "Horizon T");
    sweep->add_option("--seed", seed, "Base seed");
    sweep->add_option("--out", out_path, "Sweep CSV output path")->required();

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (plan->parsed()) return cmd_plan(scenario_path, flags, plan_horizon, out_path, out);
        if (sim->parsed()) {
            if (!policy_path.empty() && sim->count("--planner") > 0) {
                throw ScenarioConfigError("give either --policy or --planner, not both");
            }
            return cmd_simulate(scenario_path, flags, sim_horizon, policy_path, runs, seed, out_path,
                                trace_dir, out);
        }
        return cmd_sweep(scenario_path, grid_text, p_plan, runs, sweep_horizon, seed, out_path, out);
    } catch (const InfeasibleConstraintError& e) {
        err << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const ScenarioConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidMdpError& e) {
        err << "validation error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ProductBuildError& e) {
        err << "validation error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const KernelFamilyError& e) {
        err << "validation error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const UnboundedRewardError& e) {
        err << "validation error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace deceptive
