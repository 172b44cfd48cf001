#include "deceptive/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>

#include <fmt/format.h>

namespace deceptive {

int controller_horizon(const Controller& controller) {
    return std::visit(
        [](const auto& c) -> int {
            if constexpr (std::is_same_v<std::decay_t<decltype(c)>, NoObsController>) {
                return c.horizon();
            } else {
                return c.policy.horizon();
            }
        },
        controller);
}

namespace {

std::uint32_t sample_outcome(const Distribution& dist, std::mt19937_64& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (const auto& o : dist) {
        acc += o.probability;
        if (u < acc) return o.index;
    }
    return dist.back().index;
}

}  // namespace

SimTrace simulate_run(const ScenarioBundle& bundle, const Controller& controller, int horizon,
                      std::uint64_t seed) {
    if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
    if (controller_horizon(controller) < horizon) {
        throw std::invalid_argument("controller horizon " +
                                    std::to_string(controller_horizon(controller)) +
                                    " is shorter than simulation horizon " +
                                    std::to_string(horizon));
    }
    const std::size_t nB = bundle.belief_count();
    const auto* belief_policy = std::get_if<BeliefPolicy>(&controller);
    const auto* state_policy = std::get_if<StatePolicy>(&controller);
    std::optional<NoObsController> blind;
    if (const auto* c = std::get_if<NoObsController>(&controller)) {
        blind = *c;
        if (!blind->initialized()) blind->reset();
    }
    if (belief_policy && belief_policy->policy.state_count() != bundle.agent.state_count() * nB) {
        throw std::invalid_argument("belief policy does not match the product state count");
    }
    if (state_policy && state_policy->policy.state_count() != bundle.agent.state_count()) {
        throw std::invalid_argument("state policy does not match the agent state count");
    }

    std::mt19937_64 rng(seed);
    SimTrace trace;
    trace.seed = seed;
    trace.steps.reserve(static_cast<std::size_t>(horizon) + 1);

    StateId s = bundle.start;
    BeliefId b = bundle.initial_belief.fixed
                     ? *bundle.initial_belief.fixed
                     : static_cast<BeliefId>(
                           std::min<std::size_t>(static_cast<std::size_t>(uniform01(rng) * nB), nB - 1));

    for (int t = 0; t <= horizon; ++t) {
        ActionId a;
        if (belief_policy) {
            a = belief_policy->policy.action(t, static_cast<StateId>(s * nB + b));
        } else if (state_policy) {
            a = state_policy->policy.action(t, s);
        } else {
            a = blind->act(s, t, rng);
        }
        if (!bundle.agent.is_permissible(s, a)) {
            throw std::logic_error("controller chose a non-permissible action at step " +
                                   std::to_string(t));
        }
        trace.steps.push_back({t, s, b, a, bundle.reward.at(s, b, a)});
        if (t == horizon) break;
        const StateId next_s = sample_outcome(bundle.agent.transition(s, a), rng);
        const BeliefId next_b = sample_outcome(bundle.kernel.at(s, b, a), rng);
        if (blind) blind->update(s, a);
        s = next_s;
        b = next_b;
    }
    return trace;
}

std::vector<double> average_reward_curve(const SimTrace& trace) {
    if (trace.steps.empty()) throw std::invalid_argument("empty trace");
    std::vector<double> curve;
    curve.reserve(trace.steps.size() - 1);
    double sum = trace.steps.front().reward;
    for (std::size_t k = 1; k < trace.steps.size(); ++k) {
        sum += trace.steps[k].reward;
        curve.push_back(sum / static_cast<double>(k));
    }
    return curve;
}

unsigned default_thread_count() {
    if (const char* env = std::getenv("DECEPTIVE_PLANNER_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

RunStats monte_carlo(const ScenarioBundle& bundle, const Controller& controller, int runs,
                     int horizon, std::uint64_t base_seed, unsigned threads) {
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
    if (threads == 0) threads = default_thread_count();
    threads = std::min<unsigned>(threads, static_cast<unsigned>(runs));

    std::vector<std::vector<double>> curves(static_cast<std::size_t>(runs));
    auto work = [&](unsigned worker) {
        for (int i = static_cast<int>(worker); i < runs; i += static_cast<int>(threads)) {
            curves[static_cast<std::size_t>(i)] = average_reward_curve(
                simulate_run(bundle, controller, horizon, base_seed + static_cast<std::uint64_t>(i)));
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    }

    RunStats stats;
    stats.runs = static_cast<std::size_t>(runs);
    const std::size_t len = curves.front().size();
    stats.mean.assign(len, 0.0);
    stats.stddev.assign(len, 0.0);
    for (const auto& c : curves) {
        for (std::size_t k = 0; k < len; ++k) stats.mean[k] += c[k];
    }
    for (double& m : stats.mean) m /= runs;
    for (const auto& c : curves) {
        for (std::size_t k = 0; k < len; ++k) {
            const double d = c[k] - stats.mean[k];
            stats.stddev[k] += d * d;
        }
    }
    for (double& v : stats.stddev) v = std::sqrt(v / runs);
    return stats;
}

std::vector<SweepRow> mismatch_sweep(const CopsConfig& cfg, double p_plan,
                                     const std::vector<double>& p_true_grid, int runs, int horizon,
                                     std::uint64_t base_seed, unsigned threads) {
    if (p_true_grid.empty()) throw std::invalid_argument("empty p grid");
    for (double p : p_true_grid) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p grid values must lie in [0,1]");
    }
    CopsConfig plan_cfg = cfg;
    plan_cfg.p = p_plan;
    const auto plan_bundle = build_cops_scenario(plan_cfg);
    const auto fixed_plan = plan_optimal_deception(
        build_product_mdp(plan_bundle.agent, plan_bundle.kernel, plan_bundle.reward), horizon);
    const Controller fixed{BeliefPolicy{fixed_plan.policy}};

    std::vector<SweepRow> rows;
    for (double p : p_true_grid) {
        CopsConfig true_cfg = cfg;
        true_cfg.p = p;
        const auto bundle = build_cops_scenario(true_cfg);
        const auto matched_plan = plan_optimal_deception(
            build_product_mdp(bundle.agent, bundle.kernel, bundle.reward), horizon);
        const double matched =
            monte_carlo(bundle, BeliefPolicy{matched_plan.policy}, runs, horizon, base_seed, threads)
                .terminal_mean();
        const double mismatched =
            monte_carlo(bundle, fixed, runs, horizon, base_seed, threads).terminal_mean();
        rows.push_back({p, matched - mismatched, matched, mismatched});
    }
    return rows;
}

void write_stats_csv(std::ostream& out, const RunStats& stats) {
    out << "t,mean_avg_reward,std_avg_reward\n";
    for (std::size_t k = 0; k < stats.mean.size(); ++k) {
        out << fmt::format("{},{:.10f},{:.10f}\n", k + 1, stats.mean[k], stats.stddev[k]);
    }
}

void write_trace_jsonl(std::ostream& out, const SimTrace& trace) {
    for (const auto& r : trace.steps) {
        out << fmt::format("{{\"t\":{},\"s\":{},\"B\":{},\"a\":{},\"reward\":{}}}\n", r.t, r.state,
                           r.belief, r.action, r.reward);
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "p_true,delta,matched_mean,mismatched_mean\n";
    for (const auto& r : rows) {
        out << fmt::format("{},{:.10f},{:.10f},{:.10f}\n", r.p_true, r.delta, r.matched_mean,
                           r.mismatched_mean);
    }
}

}  // namespace deceptive
