#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "deceptive/cli.hpp"
#include "deceptive/workflow.hpp"

using namespace deceptive;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs{DECEPTIVE_CONFIG_DIR};

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() /
                (std::string("deceptive_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

int cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    return run_cli(args, out, err);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST(ParseScenario, ShippedPresets) {
    const auto cops = load_scenario(kConfigs / "cops.json");
    const auto& c = std::get<CopsConfig>(cops.config);
    EXPECT_EQ(c.width, 8);
    EXPECT_EQ(c.goals.size(), 3u);
    EXPECT_EQ(c.goals[1], (GridCell{6, 5}));
    EXPECT_FALSE(c.initial_belief.fixed.has_value());

    const auto camo = load_scenario(kConfigs / "camo.json");
    const auto& m = std::get<CamoConfig>(camo.config);
    EXPECT_EQ(m.tg, (GridCell{1, 2}));
    EXPECT_EQ(m.start, (GridCell{0, 0}));
}

TEST(ParseScenario, RoundTripsThroughJson) {
    const auto loaded = load_scenario(kConfigs / "cops.json");
    const auto again = parse_scenario(scenario_to_json(loaded.config));
    const auto& a = std::get<CopsConfig>(loaded.config);
    const auto& b = std::get<CopsConfig>(again.config);
    EXPECT_EQ(a.goals, b.goals);
    EXPECT_EQ(a.p, b.p);
    EXPECT_EQ(a.start, b.start);
}

TEST(ParseScenario, RejectsMalformedDocuments) {
    EXPECT_THROW(parse_scenario(json::array()), ScenarioConfigError);
    EXPECT_THROW(parse_scenario(json{{"kind", "maze"}}), ScenarioConfigError);
    EXPECT_THROW(parse_scenario(json{{"kind", "cops"}, {"colour", 1}}), ScenarioConfigError);
    EXPECT_THROW(parse_scenario(json{{"kind", "cops"}, {"p", "high"}}), ScenarioConfigError);
    EXPECT_THROW(parse_scenario(json{{"kind", "cops"}, {"start", {0}}}), ScenarioConfigError);
    EXPECT_THROW(parse_scenario(json{{"kind", "camo"}, {"tg", {9, 9}}}), ScenarioConfigError);
    EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ScenarioConfigError);
}

TEST(ParseForbidden, GoalReferencesAndCells) {
    const ScenarioConfig cfg = CopsConfig{};
    const auto cells = parse_forbidden("G2;G3", cfg);
    ASSERT_EQ(cells.size(), 2u);
    EXPECT_EQ(cells[0], (GridCell{6, 5}));
    EXPECT_EQ(cells[1], (GridCell{4, 3}));
    EXPECT_EQ(parse_forbidden("6,5;4,3", cfg), cells);
    EXPECT_TRUE(parse_forbidden("", cfg).empty());
    EXPECT_THROW(parse_forbidden("G4", cfg), ScenarioConfigError);
    EXPECT_THROW(parse_forbidden("x", cfg), ScenarioConfigError);
    EXPECT_THROW(parse_forbidden("G1", ScenarioConfig{CamoConfig{}}), ScenarioConfigError);
}

TEST(PlanController, RejectsMissingIntervalsAndConstrainedNominal) {
    const ScenarioConfig cfg = CopsConfig{};
    const auto bundle = build_scenario(cfg);
    PlannerOptions o;
    o.horizon = 10;
    o.kind = PlannerKind::robust_dynamics;
    EXPECT_THROW(plan_controller(cfg, bundle, o), ScenarioConfigError);
    o.kind = PlannerKind::robust_rewards;
    EXPECT_THROW(plan_controller(cfg, bundle, o), ScenarioConfigError);
    o.kind = PlannerKind::nominal;
    o.forbidden = {{6, 5}};
    EXPECT_THROW(plan_controller(cfg, bundle, o), ScenarioConfigError);
}

// Policy documents are exact: a reloaded policy reproduces the original
// simulation bit for bit.
class PolicyRoundTrip : public ::testing::TestWithParam<std::pair<PlannerKind, NoObsMode>> {};

TEST_P(PolicyRoundTrip, SameStatistics) {
    const ScenarioConfig cfg = CopsConfig{};
    const auto bundle = build_scenario(cfg);
    PlannerOptions o;
    o.kind = GetParam().first;
    o.no_obs_mode = GetParam().second;
    o.horizon = 150;
    o.forbidden = {{4, 3}};
    if (o.kind == PlannerKind::nominal) o.forbidden.clear();
    const auto planned = plan_controller(cfg, bundle, o);
    const auto text = policy_to_json(planned, bundle).dump();
    const auto reloaded = policy_from_json(json::parse(text), bundle);
    const auto a = monte_carlo(bundle, planned.controller, 8, 150, 3, 2);
    const auto b = monte_carlo(bundle, reloaded.controller, 8, 150, 3, 2);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.stddev, b.stddev);
    EXPECT_EQ(policy_to_json(reloaded, bundle)["actions"], json::parse(text)["actions"]);
}

INSTANTIATE_TEST_SUITE_P(
    Controllers, PolicyRoundTrip,
    ::testing::Values(std::pair{PlannerKind::optimal, NoObsMode::randomized},
                      std::pair{PlannerKind::nominal, NoObsMode::randomized},
                      std::pair{PlannerKind::no_obs, NoObsMode::randomized},
                      std::pair{PlannerKind::no_obs, NoObsMode::weighted_argmax}));

TEST(PolicyFromJson, RejectsForeignDocuments) {
    const ScenarioConfig cfg = CopsConfig{};
    const auto bundle = build_scenario(cfg);
    PlannerOptions o;
    o.horizon = 5;
    auto doc = policy_to_json(plan_controller(cfg, bundle, o), bundle);
    const auto camo = build_scenario(ScenarioConfig{CamoConfig{}});
    EXPECT_THROW(policy_from_json(doc, camo), ScenarioConfigError);
    doc["actions"][0][0] = 1;  // south out of the corner cell (0,0)
    EXPECT_THROW(policy_from_json(doc, bundle), ScenarioConfigError);
    EXPECT_THROW(policy_from_json(json{{"format", "other"}}, bundle), ScenarioConfigError);
}

// Command line ------------------------------------------------------------------------

TEST(RunCli, PlanWritesFullTable) {
    TempDir dir;
    const auto out = dir / "policy.json";
    ASSERT_EQ(cli({"plan", "--scenario", (kConfigs / "cops.json").string(), "--out", out.string()}),
              kExitOk);
    const auto doc = json::parse(slurp(out));
    EXPECT_EQ(doc["actions"].size(), 2001u);
    EXPECT_EQ(doc["actions"][0].size(), 192u);
    EXPECT_EQ(doc["state_count"], 192);
}

TEST(RunCli, MalformedScenarioIsUsageErrorWithoutOutput) {
    TempDir dir;
    write(dir / "bad.json", "{\"kind\": \"cops\", \"p\": ");
    const auto out = dir / "policy.json";
    EXPECT_EQ(cli({"plan", "--scenario", (dir / "bad.json").string(), "--out", out.string()}), kExitUsage);
    EXPECT_FALSE(fs::exists(out));
    EXPECT_EQ(cli({"plan", "--scenario", (kConfigs / "cops.json").string()}), kExitUsage);
    EXPECT_EQ(cli({"frobnicate"}), kExitUsage);
}

TEST(RunCli, ForbiddenStartIsInfeasible) {
    TempDir dir;
    const auto out = dir / "policy.json";
    EXPECT_EQ(cli({"plan", "--scenario", (kConfigs / "cops.json").string(), "--horizon", "10",
                   "--forbidden", "0,7", "--out", out.string()}),
              kExitInfeasible);
    EXPECT_FALSE(fs::exists(out));
}

TEST(RunCli, UnboundedRewardIntervalIsNumericFailure) {
    TempDir dir;
    EXPECT_EQ(cli({"plan", "--scenario", (kConfigs / "cops.json").string(), "--horizon", "10",
                   "--planner", "robust-rewards", "--reward-low=-inf", "--reward-high", "10", "--out",
                   (dir / "p.json").string()}),
              kExitNumeric);
}

TEST(RunCli, CamoNominalSimulationIsAllZero) {
    TempDir dir;
    const auto csv = dir / "stats.csv";
    ASSERT_EQ(cli({"simulate", "--scenario", (kConfigs / "camo.json").string(), "--planner",
                   "nominal", "--horizon", "50", "--runs", "5", "--out", csv.string()}),
              kExitOk);
    std::istringstream in(slurp(csv));
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_NE(line.find(",0.0000000000,0.0000000000"), std::string::npos) << line;
    }
    EXPECT_EQ(rows, 50);
}

TEST(RunCli, SimulateFromPolicyFileAndTraces) {
    TempDir dir;
    const auto scenario = (kConfigs / "cops.json").string();
    const auto policy = dir / "policy.json";
    ASSERT_EQ(cli({"plan", "--scenario", scenario, "--horizon", "40", "--out", policy.string()}), kExitOk);
    EXPECT_EQ(cli({"simulate", "--scenario", scenario, "--policy", policy.string(), "--horizon", "80",
                   "--out", (dir / "s.csv").string()}),
              kExitUsage);
    EXPECT_EQ(cli({"simulate", "--scenario", scenario, "--policy", policy.string(), "--planner", "optimal",
                   "--out", (dir / "s.csv").string()}),
              kExitUsage);
    ASSERT_EQ(cli({"simulate", "--scenario", scenario, "--policy", policy.string(), "--runs", "2",
                   "--trace-dir", (dir / "traces").string(), "--out", (dir / "s.csv").string()}),
              kExitOk);
    EXPECT_TRUE(fs::exists(dir / "traces/run_0000.jsonl"));
    EXPECT_TRUE(fs::exists(dir / "traces/run_0001.jsonl"));
}

TEST(RunCli, SweepValidatesGridAndReportsSmallDelta) {
    TempDir dir;
    const auto scenario = (kConfigs / "cops.json").string();
    const auto csv = dir / "sweep.csv";
    EXPECT_EQ(cli({"sweep", "--scenario", scenario, "--p-grid", "", "--out", csv.string()}), kExitUsage);
    EXPECT_EQ(cli({"sweep", "--scenario", scenario, "--p-grid", "0.1,abc", "--out", csv.string()}),
              kExitUsage);
    ASSERT_EQ(cli({"sweep", "--scenario", scenario, "--p-grid", "0.1", "--runs", "20", "--horizon", "300",
                   "--out", csv.string()}),
              kExitOk);
    std::istringstream in(slurp(csv));
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "p_true,delta,matched_mean,mismatched_mean");
    const double delta = std::stod(row.substr(row.find(',') + 1));
    EXPECT_LT(std::abs(delta), 0.3);
}
