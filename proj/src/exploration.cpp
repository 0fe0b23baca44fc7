#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "mvmdp/error.hpp"
#include "mvmdp/solvers.hpp"
#include "solver_common.hpp"

namespace mvmdp {

namespace {

struct Proposal {
  DeterministicPolicy explored;
  DeterministicPolicy greedy;
  bool exploring = true;  // false when the step is plain policy iteration
};

using Proposer = std::function<Proposal(int step, const DeterministicPolicy& current,
                                        const EvaluationReport& report,
                                        const std::vector<std::uint64_t>& counts)>;

void check_common(const MdpModel& model, const ExplorationConfig& config) {
  if (config.budget < 1) throw ValidationError("exploration budget must be at least 1");
  if (!config.counts.empty() &&
      config.counts.size() != static_cast<std::size_t>(model.num_states()) * model.num_actions())
    throw ValidationError("visit counts must have S x A entries");
}

ExplorationResult run(const MdpModel& model, const DeterministicPolicy& initial,
                      const ExplorationConfig& config, const Proposer& propose) {
  validate(model, initial);
  const auto num_actions = static_cast<std::size_t>(model.num_actions());

  ExplorationResult result;
  result.counts = config.counts;
  result.counts.resize(model.num_states() * num_actions, 0);
  auto visit = [&](const DeterministicPolicy& policy) {
    for (int i = 0; i < policy.size(); ++i) ++result.counts[i * num_actions + policy[i]];
  };

  DeterministicPolicy current = initial;
  EvaluationReport report = detail::evaluate_iterate(model, current);
  result.evaluations = 1;
  visit(current);
  result.best_policy = current;
  result.best_report = report;
  result.trace.iterations.push_back(detail::make_record(0, current, report, 0));
  result.trace.stop_reason = StopReason::max_iterations;

  for (int step = 1; step <= config.budget; ++step) {
    Proposal proposal = propose(step, current, report, result.counts);
    DeterministicPolicy next = std::move(proposal.explored);
    if (states_changed(next, current) == 0) {
      result.trace.iterations.push_back(detail::make_record(step, current, report, 0));
      if (!proposal.exploring) {
        result.trace.converged = true;
        result.trace.stop_reason = StopReason::fixed_point;
        break;
      }
      visit(current);
      continue;
    }
    if (!is_unichain(induced_chain(model, next).transition)) next = std::move(proposal.greedy);
    const int changed = states_changed(next, current);
    if (changed > 0) {
      report = detail::evaluate_iterate(model, next);
      ++result.evaluations;
      current = std::move(next);
      if (report.j_combined > result.best_report.j_combined) {
        result.best_policy = current;
        result.best_report = report;
      }
    }
    visit(current);
    result.trace.iterations.push_back(detail::make_record(step, current, report, changed));
  }
  return result;
}

}  // namespace

ExplorationResult epsilon_greedy_iteration(const MdpModel& model, const DeterministicPolicy& initial,
                                           const ExplorationConfig& config) {
  check_common(model, config);
  if (config.mode != ExplorationMode::epsilon_greedy)
    throw ValidationError("epsilon_greedy_iteration requires epsilon-greedy mode");
  if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0))
    throw ValidationError("epsilon must lie in [0, 1]");

  auto rng = detail::seeded_rng(config.seed, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Proposer propose = [&](int, const DeterministicPolicy& current,
                               const EvaluationReport& report, const std::vector<std::uint64_t>&) {
    const StateActionTable scores = improvement_scores(model, report.j_mean, report.potential);
    Proposal p{{}, improve_policy(model, scores, current), config.epsilon > 0.0};
    p.explored = p.greedy;
    for (int i = 0; i < model.num_states(); ++i) {
      const double u = unit(rng);
      if (u < config.epsilon) {
        const auto& feasible = model.feasible(i);
        std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
        p.explored.set(i, feasible[pick(rng)]);
      }
    }
    return p;
  };
  return run(model, initial, config, propose);
}

ExplorationResult ucb_iteration(const MdpModel& model, const DeterministicPolicy& initial,
                                const ExplorationConfig& config) {
  check_common(model, config);
  if (config.mode != ExplorationMode::ucb) throw ValidationError("ucb_iteration requires UCB mode");
  if (!(config.gamma >= 0.0)) throw ValidationError("gamma must be nonnegative");
  if (!(config.gamma_decay >= 0.0 && config.gamma_decay <= 1.0))
    throw ValidationError("gamma_decay must lie in [0, 1]");

  const auto num_actions = static_cast<std::size_t>(model.num_actions());
  const Proposer propose = [&](int step, const DeterministicPolicy& current,
                               const EvaluationReport& report,
                               const std::vector<std::uint64_t>& counts) {
    const StateActionTable scores = improvement_scores(model, report.j_mean, report.potential);
    const double gamma = config.gamma * std::pow(config.gamma_decay, step - 1);
    Proposal p{{}, improve_policy(model, scores, current), gamma > 0.0};
    p.explored = p.greedy;
    if (!p.exploring) return p;

    constexpr double kInf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < model.num_states(); ++i) {
      const auto& feasible = model.feasible(i);
      double total = 0.0;
      for (int a : feasible) total += static_cast<double>(counts[i * num_actions + a]);

      // Never-used actions first, best score among them.
      int fresh = -1;
      for (int a : feasible)
        if (counts[i * num_actions + a] == 0 && (fresh < 0 || scores.at(i, a) > scores.at(i, fresh)))
          fresh = a;
      if (fresh >= 0) {
        p.explored.set(i, fresh);
        continue;
      }

      auto value = [&](int a) {
        const double n = static_cast<double>(counts[i * num_actions + a]);
        const double bonus = total > 1.0 ? gamma * std::sqrt(2.0 * std::log(total) / n) : 0.0;
        return scores.at(i, a) + bonus;
      };
      double best = -kInf;
      for (int a : feasible) best = std::max(best, value(a));
      if (value(current[i]) >= best - kImprovementMargin) {
        p.explored.set(i, current[i]);
        continue;
      }
      for (int a : feasible)
        if (value(a) >= best - kImprovementMargin) {
          p.explored.set(i, a);
          break;
        }
    }
    return p;
  };
  return run(model, initial, config, propose);
}

}  // namespace mvmdp
