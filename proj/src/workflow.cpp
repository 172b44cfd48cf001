#include "deceptive/workflow.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace deceptive {

using nlohmann::json;

std::string to_string(PlannerKind kind) {
    switch (kind) {
        case PlannerKind::optimal: return "optimal";
        case PlannerKind::robust_dynamics: return "robust-dynamics";
        case PlannerKind::robust_rewards: return "robust-rewards";
        case PlannerKind::no_obs: return "no-obs";
        case PlannerKind::nominal: return "nominal";
    }
    return "?";
}

std::optional<PlannerKind> parse_planner_kind(const std::string& text) {
    for (auto k : {PlannerKind::optimal, PlannerKind::robust_dynamics, PlannerKind::robust_rewards,
                   PlannerKind::no_obs, PlannerKind::nominal}) {
        if (text == to_string(k)) return k;
    }
    return std::nullopt;
}

// Scenario documents -----------------------------------------------------------

namespace {

[[noreturn]] void config_error(const std::string& msg) { throw ScenarioConfigError(msg); }

GridCell parse_cell(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
        config_error(std::string(what) + " must be [col, row]");
    }
    return {j[0].get<int>(), j[1].get<int>()};
}

json cell_json(GridCell c) { return json::array({c.col, c.row}); }

double number(const json& doc, const char* key, double fallback) {
    if (!doc.contains(key)) return fallback;
    if (!doc[key].is_number()) config_error(std::string(key) + " must be a number");
    return doc[key].get<double>();
}

void check_keys(const json& doc, const std::set<std::string>& allowed) {
    for (const auto& [key, unused] : doc.items()) {
        if (!allowed.contains(key)) config_error("unknown scenario key '" + key + "'");
    }
}

void parse_grid(const json& doc, int& width, int& height) {
    if (!doc.contains("grid")) return;
    const auto& g = doc["grid"];
    if (!g.is_object() || !g.contains("w") || !g.contains("h") || !g["w"].is_number_integer() ||
        !g["h"].is_number_integer()) {
        config_error("grid must be {\"w\": int, \"h\": int}");
    }
    width = g["w"].get<int>();
    height = g["h"].get<int>();
}

}  // namespace

LoadedScenario parse_scenario(const json& doc) {
    if (!doc.is_object()) config_error("scenario document must be a JSON object");
    if (!doc.contains("kind") || !doc["kind"].is_string()) config_error("missing scenario kind");
    const auto kind = doc["kind"].get<std::string>();
    LoadedScenario loaded;
    if (doc.contains("forbidden")) {
        if (!doc["forbidden"].is_array()) config_error("forbidden must be a list of cells");
        for (const auto& c : doc["forbidden"]) loaded.forbidden.push_back(parse_cell(c, "forbidden cell"));
    }

    if (kind == "cops") {
        check_keys(doc, {"kind", "grid", "start", "goals", "true_goal", "p", "reward_plus",
                         "reward_minus", "initial_belief", "forbidden"});
        CopsConfig cfg;
        parse_grid(doc, cfg.width, cfg.height);
        if (doc.contains("start")) cfg.start = parse_cell(doc["start"], "start");
        if (doc.contains("goals")) {
            if (!doc["goals"].is_array()) config_error("goals must be a list of cells");
            cfg.goals.clear();
            for (const auto& g : doc["goals"]) cfg.goals.push_back(parse_cell(g, "goal"));
        }
        if (doc.contains("true_goal")) {
            if (!doc["true_goal"].is_number_unsigned()) config_error("true_goal must be an index");
            cfg.true_goal_index = doc["true_goal"].get<std::size_t>();
        }
        cfg.p = number(doc, "p", cfg.p);
        cfg.reward_plus = number(doc, "reward_plus", cfg.reward_plus);
        cfg.reward_minus = number(doc, "reward_minus", cfg.reward_minus);
        if (doc.contains("initial_belief")) {
            const auto& ib = doc["initial_belief"];
            if (ib.is_string() && ib.get<std::string>() == "uniform") {
                cfg.initial_belief = InitialBelief::uniform();
            } else if (ib.is_number_unsigned()) {
                cfg.initial_belief = InitialBelief::of(ib.get<BeliefId>());
            } else {
                config_error("initial_belief must be \"uniform\" or a goal index");
            }
        }
        cfg.validate();
        loaded.config = cfg;
    } else if (kind == "camo") {
        check_keys(doc, {"kind", "grid", "start", "tg", "p", "r", "c", "initial_belief", "forbidden"});
        CamoConfig cfg;
        parse_grid(doc, cfg.width, cfg.height);
        if (doc.contains("start")) cfg.start = parse_cell(doc["start"], "start");
        if (doc.contains("tg")) cfg.tg = parse_cell(doc["tg"], "tg");
        cfg.p = number(doc, "p", cfg.p);
        cfg.r = number(doc, "r", cfg.r);
        cfg.c = number(doc, "c", cfg.c);
        if (doc.contains("initial_belief")) {
            cfg.initial_belief = parse_cell(doc["initial_belief"], "initial_belief");
        }
        cfg.validate();
        loaded.config = cfg;
    } else {
        config_error("unknown scenario kind '" + kind + "'");
    }
    return loaded;
}

LoadedScenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot open scenario file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        config_error("malformed scenario file " + path.string() + ": " + e.what());
    }
    return parse_scenario(doc);
}

json scenario_to_json(const ScenarioConfig& cfg) {
    if (const auto* c = std::get_if<CopsConfig>(&cfg)) {
        json goals = json::array();
        for (const auto& g : c->goals) goals.push_back(cell_json(g));
        json doc{{"kind", "cops"},
                 {"grid", {{"w", c->width}, {"h", c->height}}},
                 {"start", cell_json(c->start)},
                 {"goals", goals},
                 {"true_goal", c->true_goal_index},
                 {"p", c->p},
                 {"reward_plus", c->reward_plus},
                 {"reward_minus", c->reward_minus}};
        if (c->initial_belief.fixed) {
            doc["initial_belief"] = *c->initial_belief.fixed;
        } else {
            doc["initial_belief"] = "uniform";
        }
        return doc;
    }
    const auto& c = std::get<CamoConfig>(cfg);
    json doc{{"kind", "camo"},
             {"grid", {{"w", c.width}, {"h", c.height}}},
             {"start", cell_json(c.start)},
             {"tg", cell_json(c.tg)},
             {"p", c.p},
             {"r", c.r},
             {"c", c.c}};
    if (c.initial_belief) doc["initial_belief"] = cell_json(*c.initial_belief);
    return doc;
}

std::vector<GridCell> parse_forbidden(const std::string& text, const ScenarioConfig& cfg) {
    std::vector<GridCell> cells;
    std::stringstream items(text);
    std::string item;
    while (std::getline(items, item, ';')) {
        if (item.empty()) continue;
        if (item[0] == 'G' || item[0] == 'g') {
            const auto* cops = std::get_if<CopsConfig>(&cfg);
            if (!cops) config_error("goal references need a cops scenario");
            std::size_t k = 0;
            try {
                k = std::stoul(item.substr(1));
            } catch (const std::exception&) {
                config_error("bad goal reference '" + item + "'");
            }
            if (k < 1 || k > cops->goals.size()) config_error("goal reference out of range: " + item);
            cells.push_back(cops->goals[k - 1]);
            continue;
        }
        const auto comma = item.find(',');
        if (comma == std::string::npos) config_error("forbidden cell must be 'col,row' or 'G<k>'");
        try {
            cells.push_back({std::stoi(item.substr(0, comma)), std::stoi(item.substr(comma + 1))});
        } catch (const std::exception&) {
            config_error("bad forbidden cell '" + item + "'");
        }
    }
    return cells;
}

// Planning ---------------------------------------------------------------------

namespace {

std::vector<StateId> product_starts(const ScenarioBundle& bundle) {
    const std::size_t nB = bundle.belief_count();
    if (bundle.initial_belief.fixed) {
        return {static_cast<StateId>(bundle.start * nB + *bundle.initial_belief.fixed)};
    }
    std::vector<StateId> starts;
    for (BeliefId b = 0; b < nB; ++b) starts.push_back(static_cast<StateId>(bundle.start * nB + b));
    return starts;
}

}  // namespace

PlannedController plan_controller(const ScenarioConfig& cfg, const ScenarioBundle& bundle,
                                  const PlannerOptions& options) {
    if (options.horizon < 0) config_error("horizon must be >= 0");
    std::set<StateId> forbidden;
    for (const auto& c : options.forbidden) {
        if (!bundle.grid.contains(c)) config_error("forbidden cell outside the grid");
        forbidden.insert(bundle.grid.state(c));
    }
    const auto starts = product_starts(bundle);

    switch (options.kind) {
        case PlannerKind::nominal: {
            if (!forbidden.empty()) config_error("the nominal policy does not take constraints");
            return {StatePolicy{bundle.nominal_policy(options.horizon)}, std::nullopt, options};
        }
        case PlannerKind::optimal:
        case PlannerKind::no_obs: {
            auto product = apply_forbidden_states(
                build_product_mdp(bundle.agent, bundle.kernel, bundle.reward), forbidden, starts);
            auto plan = plan_optimal_deception(product, options.horizon);
            if (options.kind == PlannerKind::optimal) {
                return {BeliefPolicy{plan.policy}, plan, options};
            }
            NoObsController ctrl(std::move(product), bundle.kernel, plan, options.no_obs_mode);
            return {std::move(ctrl), std::move(plan), options};
        }
        case PlannerKind::robust_dynamics: {
            if (!options.p_interval) config_error("robust-dynamics needs --p-low and --p-high");
            const auto [lo, hi] = *options.p_interval;
            const IntervalKernelFamily family =
                std::holds_alternative<CopsConfig>(cfg)
                    ? cops_kernel_family(std::get<CopsConfig>(cfg), bundle.agent, lo, hi)
                    : camo_kernel_family(std::get<CamoConfig>(cfg), bundle.agent, lo, hi);
            auto plan = plan_robust_dynamics(bundle.agent, family, bundle.reward, options.horizon,
                                             forbidden, starts);
            return {BeliefPolicy{plan.policy}, plan, options};
        }
        case PlannerKind::robust_rewards: {
            if (!options.reward_interval) {
                config_error("robust-rewards needs --reward-low and --reward-high");
            }
            const auto* cops = std::get_if<CopsConfig>(&cfg);
            if (!cops) config_error("robust-rewards is defined for the cops scenario");
            const auto family = cops_reward_family(*cops, bundle.agent, options.reward_interval->low,
                                                   options.reward_interval->high);
            auto plan = plan_robust_rewards(bundle.agent, bundle.kernel, family, options.horizon,
                                            forbidden, starts);
            return {BeliefPolicy{plan.policy}, plan, options};
        }
    }
    config_error("unknown planner");
}

// Policy documents -------------------------------------------------------------

namespace {

json action_rows(const Policy& policy) {
    json rows = json::array();
    for (int t = 0; t <= policy.horizon(); ++t) {
        json row = json::array();
        for (StateId x = 0; x < policy.state_count(); ++x) row.push_back(policy.action(t, x));
        rows.push_back(std::move(row));
    }
    return rows;
}

Policy policy_from_rows(const json& rows, int horizon, std::size_t state_count,
                        const ScenarioBundle& bundle, std::size_t belief_count) {
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(horizon) + 1) {
        config_error("policy document has the wrong number of action rows");
    }
    Policy policy(horizon, state_count);
    for (int t = 0; t <= horizon; ++t) {
        const auto& row = rows[static_cast<std::size_t>(t)];
        if (!row.is_array() || row.size() != state_count) {
            config_error("policy row " + std::to_string(t) + " has the wrong length");
        }
        for (StateId x = 0; x < state_count; ++x) {
            if (!row[x].is_number_unsigned()) config_error("policy actions must be indices");
            const auto a = row[x].get<ActionId>();
            if (!bundle.agent.is_permissible(static_cast<StateId>(x / belief_count), a)) {
                config_error("policy maps state " + std::to_string(x) +
                             " to a non-permissible action");
            }
            policy.set_action(t, x, a);
        }
    }
    return policy;
}

}  // namespace

json policy_to_json(const PlannedController& planned, const ScenarioBundle& bundle) {
    json doc{{"format", "deceptive-policy"},
             {"version", 1},
             {"scenario", bundle.kind},
             {"planner", to_string(planned.options.kind)},
             {"horizon", planned.options.horizon},
             {"agent_state_count", bundle.agent.state_count()},
             {"action_count", bundle.agent.action_count()}};
    json forbidden = json::array();
    for (const auto& c : planned.options.forbidden) forbidden.push_back(cell_json(c));
    doc["forbidden"] = std::move(forbidden);

    if (const auto* sp = std::get_if<StatePolicy>(&planned.controller)) {
        doc["controller"] = "state";
        doc["belief_count"] = 1;
        doc["state_count"] = bundle.agent.state_count();
        doc["product_index"] = "s";
        doc["actions"] = action_rows(sp->policy);
        return doc;
    }

    const std::size_t nB = bundle.belief_count();
    const auto& plan = *planned.plan;
    doc["belief_count"] = nB;
    doc["state_count"] = plan.policy.state_count();
    doc["product_index"] = "s*belief_count+b";
    json states = json::array();
    for (StateId x = 0; x < plan.policy.state_count(); ++x) {
        states.push_back(json::array({x / nB, x % nB}));
    }
    doc["states"] = std::move(states);
    doc["actions"] = action_rows(plan.policy);

    json summary{{"start", bundle.start}};
    json v0 = json::array();
    double sum = 0.0;
    for (BeliefId b = 0; b < nB; ++b) {
        const double v = plan.values.value(0, static_cast<StateId>(bundle.start * nB + b));
        v0.push_back(v);
        sum += v;
    }
    summary["v0_by_belief"] = std::move(v0);
    summary["v0_mean"] = sum / static_cast<double>(nB);
    doc["value_summary"] = std::move(summary);

    if (const auto* blind = std::get_if<NoObsController>(&planned.controller)) {
        doc["controller"] = "no-obs";
        doc["no_obs_mode"] = to_string(blind->mode());
        // Values are only needed to reproduce the weighted-argmax choice.
        if (blind->mode() == NoObsMode::weighted_argmax) {
            json values = json::array();
            for (int t = 0; t <= plan.values.horizon(); ++t) {
                json row = json::array();
                for (StateId x = 0; x < plan.values.state_count(); ++x) {
                    row.push_back(plan.values.value(t, x));
                }
                values.push_back(std::move(row));
            }
            doc["values"] = std::move(values);
        }
    } else {
        doc["controller"] = "belief";
    }
    return doc;
}

PlannedController policy_from_json(const json& doc, const ScenarioBundle& bundle) {
    if (!doc.is_object() || doc.value("format", "") != "deceptive-policy") {
        config_error("not a policy document");
    }
    if (doc.value("version", 0) != 1) config_error("unsupported policy document version");
    if (doc.value("scenario", "") != bundle.kind) config_error("policy was planned for another scenario");
    const int horizon = doc.value("horizon", -1);
    if (horizon < 0) config_error("policy document has no horizon");
    const auto kind = parse_planner_kind(doc.value("planner", ""));
    if (!kind) config_error("policy document names an unknown planner");
    if (doc.value("agent_state_count", std::size_t{0}) != bundle.agent.state_count() ||
        doc.value("action_count", std::size_t{0}) != bundle.agent.action_count()) {
        config_error("policy dimensions do not match the scenario");
    }

    PlannerOptions options;
    options.kind = *kind;
    options.horizon = horizon;
    if (doc.contains("forbidden")) {
        if (!doc["forbidden"].is_array()) config_error("forbidden must be a list of cells");
        for (const auto& c : doc["forbidden"]) options.forbidden.push_back(parse_cell(c, "forbidden cell"));
    }
    const auto controller = doc.value("controller", "");

    if (controller == "state") {
        auto policy = policy_from_rows(doc["actions"], horizon, bundle.agent.state_count(), bundle, 1);
        return {StatePolicy{std::move(policy)}, std::nullopt, options};
    }

    const std::size_t nB = bundle.belief_count();
    if (doc.value("belief_count", std::size_t{0}) != nB) {
        config_error("policy belief count does not match the scenario");
    }
    const std::size_t n = bundle.agent.state_count() * nB;
    PlanResult plan{policy_from_rows(doc["actions"], horizon, n, bundle, nB), ValueTable(horizon, n)};

    if (controller == "belief") return {BeliefPolicy{plan.policy}, plan, options};
    if (controller != "no-obs") config_error("unknown controller type '" + controller + "'");

    const auto mode = parse_no_obs_mode(doc.value("no_obs_mode", ""));
    if (!mode) config_error("unknown no-obs mode");
    options.no_obs_mode = *mode;
    if (*mode == NoObsMode::weighted_argmax) {
        const auto& values = doc["values"];
        if (!values.is_array() || values.size() != static_cast<std::size_t>(horizon) + 1) {
            config_error("weighted-argmax policy document needs value rows");
        }
        for (int t = 0; t <= horizon; ++t) {
            const auto& row = values[static_cast<std::size_t>(t)];
            if (!row.is_array() || row.size() != n) config_error("value row has the wrong length");
            for (StateId x = 0; x < n; ++x) plan.values.value(t, x) = row[x].get<double>();
        }
    }
    std::set<StateId> forbidden;
    for (const auto& c : options.forbidden) {
        if (!bundle.grid.contains(c)) config_error("forbidden cell outside the grid");
        forbidden.insert(bundle.grid.state(c));
    }
    auto product = apply_forbidden_states(
        build_product_mdp(bundle.agent, bundle.kernel, bundle.reward), forbidden,
        product_starts(bundle));
    NoObsController ctrl(std::move(product), bundle.kernel, plan, *mode);
    return {std::move(ctrl), std::move(plan), options};
}

}  // namespace deceptive
