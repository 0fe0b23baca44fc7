#include <algorithm>
#include <random>
#include <set>

#include "mvmdp/error.hpp"
#include "mvmdp/solvers.hpp"
#include "solver_common.hpp"

namespace mvmdp {

const char* to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::fixed_point: return "fixed_point";
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::threshold: return "threshold";
  }
  return "unknown";
}

int states_changed(const DeterministicPolicy& a, const DeterministicPolicy& b) {
  if (a.size() != b.size()) throw ValidationError("policies have different numbers of states");
  int n = 0;
  for (int i = 0; i < a.size(); ++i) n += a[i] != b[i];
  return n;
}

DeterministicPolicy improve_policy(const MdpModel& model, const StateActionTable& scores,
                                   const DeterministicPolicy& current) {
  DeterministicPolicy next = current;
  for (int i = 0; i < model.num_states(); ++i) {
    const double best = scores.argmax(i).second;
    if (scores.at(i, current[i]) >= best - kImprovementMargin) continue;
    for (int a : model.feasible(i))
      if (scores.at(i, a) >= best - kImprovementMargin) {
        next.set(i, a);
        break;
      }
  }
  return next;
}

namespace detail {

EvaluationReport evaluate_iterate(const MdpModel& model, const DeterministicPolicy& policy) {
  const InducedChain chain = induced_chain(model, policy);
  if (!is_unichain(chain.transition))
    throw SolverError("policy " + policy.to_string() + " induces a chain with more than one closed class");
  return evaluate_chain(chain, model.beta());
}

IterationRecord<DeterministicPolicy> make_record(int iteration, const DeterministicPolicy& policy,
                                                 const EvaluationReport& report, int changed) {
  return {iteration, policy, report.j_mean, report.j_var, report.j_combined, changed};
}

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace detail

PolicyIterationResult policy_iteration(const MdpModel& model, const DeterministicPolicy& initial,
                                       const PolicyIterationOptions& options) {
  validate(model, initial);
  const int cap = options.max_iterations > 0 ? options.max_iterations
                                             : 10 * model.num_states() * model.num_actions();

  PolicyIterationResult result{initial, detail::evaluate_iterate(model, initial), {}};
  result.trace.iterations.push_back(detail::make_record(0, result.policy, result.report, 0));

  for (int step = 1; step <= cap; ++step) {
    const StateActionTable scores =
        improvement_scores(model, result.report.j_mean, result.report.potential);
    DeterministicPolicy next = improve_policy(model, scores, result.policy);
    const int changed = states_changed(next, result.policy);
    if (changed == 0) {
      result.trace.iterations.push_back(detail::make_record(step, result.policy, result.report, 0));
      result.trace.converged = true;
      result.trace.stop_reason = StopReason::fixed_point;
      return result;
    }
    result.report = detail::evaluate_iterate(model, next);
    result.policy = std::move(next);
    result.trace.iterations.push_back(
        detail::make_record(step, result.policy, result.report, changed));
  }
  result.trace.converged = false;
  result.trace.stop_reason = StopReason::max_iterations;
  return result;
}

int diversity(const std::vector<DeterministicPolicy>& policies) {
  if (policies.empty()) throw ValidationError("diversity of an empty policy set is undefined");
  const int n = policies.front().size();
  int total = 0;
  for (int i = 0; i < n; ++i) {
    std::set<int> used;
    for (const auto& p : policies) {
      if (p.size() != n) throw ValidationError("policies have different numbers of states");
      used.insert(p[i]);
    }
    total += static_cast<int>(used.size());
  }
  return total;
}

DeterministicPolicy sample_initial_policy(const MdpModel& model, std::uint64_t seed,
                                          std::uint64_t index, int max_draws) {
  auto rng = detail::seeded_rng(seed, index);
  for (int draw = 0; draw < std::max(1, max_draws); ++draw) {
    DeterministicPolicy candidate = random_policy(model, rng);
    if (is_unichain(induced_chain(model, candidate).transition)) return candidate;
  }
  throw SolverError("no initial policy with a unichain chain found in " +
                    std::to_string(max_draws) + " draws");
}

std::vector<double> distinct_values(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  for (double v : values)
    if (out.empty() || v - out.back() > kDistinctOptimumGap) out.push_back(v);
  return out;
}

MultiStartResult multi_start(const MdpModel& model, const MultiStartOptions& options) {
  if (options.num_starts < 1) throw ValidationError("num_starts must be at least 1");
  const int candidates = std::max(1, options.candidates_per_start);

  MultiStartResult result;
  for (int k = 0; k < options.num_starts; ++k) {
    DeterministicPolicy chosen;
    int chosen_psi = -1;
    for (int c = 0; c < candidates; ++c) {
      const auto stream = static_cast<std::uint64_t>(k) * candidates + c;
      DeterministicPolicy candidate =
          sample_initial_policy(model, options.seed, stream, options.max_initial_draws);
      auto with = result.initial_policies;
      with.push_back(candidate);
      const int psi = diversity(with);
      if (psi > chosen_psi) {
        chosen_psi = psi;
        chosen = std::move(candidate);
      }
    }
    result.initial_policies.push_back(chosen);
    result.runs.push_back(policy_iteration(model, chosen, options.iteration));
  }

  std::vector<double> finals;
  std::size_t best = 0;
  for (std::size_t k = 0; k < result.runs.size(); ++k) {
    finals.push_back(result.runs[k].report.j_combined);
    if (result.runs[k].report.j_combined > result.runs[best].report.j_combined) best = k;
  }
  result.best_policy = result.runs[best].policy;
  result.best_report = result.runs[best].report;
  result.distinct_optima = distinct_values(std::move(finals));
  result.initial_diversity = diversity(result.initial_policies);
  return result;
}

MultiStartResult multi_start(const MdpModel& model, int num_starts, std::uint64_t seed) {
  MultiStartOptions options;
  options.num_starts = num_starts;
  options.seed = seed;
  return multi_start(model, options);
}

}  // namespace mvmdp
