#include "deceptive/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace deceptive {

Mdp::Mdp(std::size_t state_count, std::size_t action_count)
    : state_count_(state_count),
      action_count_(action_count),
      kernel_(state_count * action_count),
      reward_(state_count * action_count, 0.0),
      permissible_(state_count) {}

bool Mdp::is_permissible(StateId s, ActionId a) const {
    const auto& actions = permissible_[s];
    return std::binary_search(actions.begin(), actions.end(), a);
}

void Mdp::set_transition(StateId s, ActionId a, Distribution dist) {
    kernel_[slot(s, a)] = std::move(dist);
}

void Mdp::set_reward(StateId s, ActionId a, double value) { reward_[slot(s, a)] = value; }

void Mdp::set_permissible(StateId s, std::vector<ActionId> actions) {
    std::sort(actions.begin(), actions.end());
    actions.erase(std::unique(actions.begin(), actions.end()), actions.end());
    permissible_[s] = std::move(actions);
}

double total_mass(const Distribution& dist) {
    double sum = 0.0;
    for (const auto& o : dist) sum += o.probability;
    return sum;
}

ValidationReport validate_mdp(const Mdp& mdp) {
    ValidationReport report;
    const auto nA = static_cast<ActionId>(mdp.action_count());
    for (StateId s = 0; s < mdp.state_count(); ++s) {
        const auto& actions = mdp.permissible(s);
        if (actions.empty()) {
            report.push_back({s, nA, "empty permissible action set"});
            continue;
        }
        for (ActionId a : actions) {
            if (a >= nA) {
                report.push_back({s, a, "permissible action out of range"});
                continue;
            }
            const auto& dist = mdp.transition(s, a);
            std::vector<bool> seen(mdp.state_count(), false);
            bool ok = !dist.empty();
            for (const auto& o : dist) {
                if (o.index >= mdp.state_count()) {
                    report.push_back({s, a, "transition target out of range"});
                    ok = false;
                    break;
                }
                if (!(o.probability >= 0.0) || o.probability > 1.0 + kNormalizationTolerance) {
                    report.push_back({s, a, "probability outside [0,1]"});
                    ok = false;
                    break;
                }
                if (seen[o.index]) {
                    report.push_back({s, a, "duplicate transition target"});
                    ok = false;
                    break;
                }
                seen[o.index] = true;
            }
            if (dist.empty()) {
                report.push_back({s, a, "missing transition distribution"});
            } else if (ok) {
                const double mass = total_mass(dist);
                if (std::abs(mass - 1.0) > kNormalizationTolerance) {
                    report.push_back({s, a, "row sums to " + std::to_string(mass)});
                }
            }
            if (!std::isfinite(mdp.reward(s, a))) {
                report.push_back({s, a, "non-finite reward"});
            }
        }
    }
    return report;
}

namespace {

std::string describe(const ValidationReport& report) {
    std::string msg = "invalid MDP: " + std::to_string(report.size()) + " violation(s)";
    if (!report.empty()) {
        msg += "; first at state " + std::to_string(report.front().state) + ", action " +
               std::to_string(report.front().action) + ": " + report.front().message;
    }
    return msg;
}

}  // namespace

InvalidMdpError::InvalidMdpError(ValidationReport report)
    : std::runtime_error(describe(report)), report_(std::move(report)) {}

Policy::Policy(int horizon, std::size_t state_count)
    : horizon_(horizon),
      state_count_(state_count),
      table_(static_cast<std::size_t>(horizon + 1) * state_count, 0) {
    if (horizon < 0) throw std::invalid_argument("policy horizon must be >= 0");
}

Policy Policy::stationary(const std::vector<ActionId>& actions, int horizon) {
    Policy p(horizon, actions.size());
    for (int t = 0; t <= horizon; ++t) {
        std::copy(actions.begin(), actions.end(), p.table_.begin() + p.row(t));
    }
    return p;
}

ValueTable::ValueTable(int horizon, std::size_t state_count)
    : horizon_(horizon),
      state_count_(state_count),
      values_(static_cast<std::size_t>(horizon + 2) * state_count, 0.0) {
    if (horizon < 0) throw std::invalid_argument("value table horizon must be >= 0");
}

double q_value(const Mdp& mdp, StateId s, ActionId a, const double* next_values) {
    double q = mdp.reward(s, a);
    for (const auto& o : mdp.transition(s, a)) q += o.probability * next_values[o.index];
    return q;
}

PlanResult backward_induction(const Mdp& mdp, int horizon) {
    if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
    if (auto report = validate_mdp(mdp); !report.empty()) throw InvalidMdpError(std::move(report));

    const std::size_t n = mdp.state_count();
    PlanResult result{Policy(horizon, n), ValueTable(horizon, n)};
    for (int t = horizon; t >= 0; --t) {
        const double* next = result.values.row_data(t + 1);
        for (StateId s = 0; s < n; ++s) {
            const auto& actions = mdp.permissible(s);
            ActionId best_action = actions.front();
            double best = q_value(mdp, s, best_action, next);
            for (std::size_t i = 1; i < actions.size(); ++i) {
                const double q = q_value(mdp, s, actions[i], next);
                if (q > best) {
                    best = q;
                    best_action = actions[i];
                }
            }
            result.values.value(t, s) = best;
            result.policy.set_action(t, s, best_action);
        }
    }
    return result;
}

double evaluate_policy(const Mdp& mdp, const Policy& policy, int horizon, StateId start) {
    if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
    if (policy.horizon() < horizon) {
        throw std::invalid_argument("policy horizon " + std::to_string(policy.horizon()) +
                                    " is shorter than requested horizon " +
                                    std::to_string(horizon));
    }
    if (policy.state_count() != mdp.state_count()) {
        throw std::invalid_argument("policy state count does not match MDP");
    }
    std::vector<double> occupancy(mdp.state_count(), 0.0);
    std::vector<double> next(mdp.state_count(), 0.0);
    occupancy[start] = 1.0;
    double total = 0.0;
    for (int t = 0; t <= horizon; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (StateId s = 0; s < mdp.state_count(); ++s) {
            if (occupancy[s] == 0.0) continue;
            const ActionId a = policy.action(t, s);
            total += occupancy[s] * mdp.reward(s, a);
            for (const auto& o : mdp.transition(s, a)) next[o.index] += occupancy[s] * o.probability;
        }
        occupancy.swap(next);
    }
    return total;
}

double brute_force_plan(const Mdp& mdp, int horizon, StateId start, double budget) {
    if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
    if (auto report = validate_mdp(mdp); !report.empty()) throw InvalidMdpError(std::move(report));

    const std::size_t n = mdp.state_count();
    const std::size_t slots = static_cast<std::size_t>(horizon + 1) * n;
    double count = 1.0;
    for (std::size_t k = 0; k < slots; ++k) {
        count *= static_cast<double>(mdp.permissible(static_cast<StateId>(k % n)).size());
        if (count > budget) {
            throw BudgetExceededError("policy enumeration exceeds budget of " +
                                      std::to_string(budget) + " policies");
        }
    }

    // Mixed-radix counter over (t, s) slots; digit k indexes permissible(k % n).
    std::vector<std::size_t> digits(slots, 0);
    Policy candidate(horizon, n);
    for (std::size_t k = 0; k < slots; ++k) {
        const auto s = static_cast<StateId>(k % n);
        candidate.set_action(static_cast<int>(k / n), s, mdp.permissible(s).front());
    }
    double best = -std::numeric_limits<double>::infinity();
    while (true) {
        best = std::max(best, evaluate_policy(mdp, candidate, horizon, start));
        std::size_t k = 0;
        for (; k < slots; ++k) {
            const auto s = static_cast<StateId>(k % n);
            const auto& actions = mdp.permissible(s);
            const int t = static_cast<int>(k / n);
            if (++digits[k] < actions.size()) {
                candidate.set_action(t, s, actions[digits[k]]);
                break;
            }
            digits[k] = 0;
            candidate.set_action(t, s, actions.front());
        }
        if (k == slots) break;
    }
    return best;
}

}  // namespace deceptive
