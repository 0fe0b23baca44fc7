#pragma once

// Policy-iteration type optimization of the mean-variance metric, its
// exploration variants and the randomized-policy gradient baseline.

#include <cstdint>
#include <vector>

#include "mvmdp/evaluation.hpp"
#include "mvmdp/mdp.hpp"
#include "mvmdp/sensitivity.hpp"

namespace mvmdp {

enum class StopReason { fixed_point, max_iterations, threshold };

const char* to_string(StopReason reason) noexcept;

template <class Policy>
struct IterationRecord {
  int iteration = 0;
  Policy policy;
  double j_mean = 0.0;
  double j_var = 0.0;
  double j_combined = 0.0;
  int states_changed = 0;
};

template <class Policy>
struct SolverTrace {
  std::vector<IterationRecord<Policy>> iterations;
  bool converged = false;
  StopReason stop_reason = StopReason::max_iterations;
};

using PolicyTrace = SolverTrace<DeterministicPolicy>;
using GradientTrace = SolverTrace<RandomizedPolicy>;

/// Number of states at which two policies pick different actions.
int states_changed(const DeterministicPolicy& a, const DeterministicPolicy& b);

/**
 * Greedy improvement step over precomputed scores.
 *
 * Keeps the current action wherever it is within kImprovementMargin of the
 * best score; elsewhere takes the lowest-indexed action within the margin.
 */
DeterministicPolicy improve_policy(const MdpModel& model, const StateActionTable& scores,
                                   const DeterministicPolicy& current);

struct PolicyIterationOptions {
  int max_iterations = 0;  // 0 selects 10 * S * A
};

struct PolicyIterationResult {
  DeterministicPolicy policy;
  EvaluationReport report;
  PolicyTrace trace;

  /// Improvement steps taken, including the final one that reproduced the policy.
  int improvement_steps() const { return static_cast<int>(trace.iterations.size()) - 1; }
};

/**
 * Policy iteration on the mean-variance metric.
 *
 * Each step evaluates the current policy and moves every state to the action
 * maximizing r - beta (r - J_mu)^2 + sum_j p^a(i,j) g(j), holding J_mu and g
 * at their current values. Stops when the policy repeats; the trace then ends
 * with two identical records. An iterate whose chain is not unichain raises SolverError.
 */
PolicyIterationResult policy_iteration(const MdpModel& model, const DeterministicPolicy& initial,
                                       const PolicyIterationOptions& options = {});

/// Sum over states of the number of distinct actions the set uses there.
int diversity(const std::vector<DeterministicPolicy>& policies);

/// Gap in J_combined above which two optima count as distinct.
inline constexpr double kDistinctOptimumGap = 1e-6;

struct MultiStartOptions {
  int num_starts = 1;
  std::uint64_t seed = 0;
  // When > 1, each start keeps the candidate that most increases diversity.
  int candidates_per_start = 1;
  // Rejection budget for drawing an initial policy with a unichain chain.
  int max_initial_draws = 1000;
  PolicyIterationOptions iteration;
};

struct MultiStartResult {
  DeterministicPolicy best_policy;
  EvaluationReport best_report;
  std::vector<DeterministicPolicy> initial_policies;
  std::vector<PolicyIterationResult> runs;  // by start index
  std::vector<double> distinct_optima;      // ascending
  int initial_diversity = 0;
};

/// Random initial policy for start `index`, derived from `seed` only.
DeterministicPolicy sample_initial_policy(const MdpModel& model, std::uint64_t seed,
                                          std::uint64_t index, int max_draws = 1000);

MultiStartResult multi_start(const MdpModel& model, const MultiStartOptions& options);
MultiStartResult multi_start(const MdpModel& model, int num_starts, std::uint64_t seed);

/// Collapses values closer than kDistinctOptimumGap; ascending.
std::vector<double> distinct_values(std::vector<double> values);

enum class ExplorationMode { epsilon_greedy, ucb };

struct ExplorationConfig {
  ExplorationMode mode = ExplorationMode::epsilon_greedy;
  double epsilon = 0.05;
  double gamma = 0.0;
  double gamma_decay = 1.0;           // gamma_l = gamma * gamma_decay^(l-1)
  std::vector<std::uint64_t> counts;  // n(s,a), row-major S x A; empty means zeros
  std::uint64_t seed = 0;
  int budget = 100;                   // improvement steps, each at most one evaluation
};

struct ExplorationResult {
  DeterministicPolicy best_policy;
  EvaluationReport best_report;
  PolicyTrace trace;
  std::vector<std::uint64_t> counts;
  int evaluations = 0;
};

/**
 * Policy iteration where each state follows the greedy step with probability
 * 1 - epsilon and a uniform feasible action otherwise. Returns the best policy
 * evaluated within the budget. With epsilon = 0 it retraces policy_iteration.
 */
ExplorationResult epsilon_greedy_iteration(const MdpModel& model, const DeterministicPolicy& initial,
                                           const ExplorationConfig& config);

/**
 * Policy iteration with an upper-confidence bonus
 * gamma sqrt(2 ln(sum_a n(i,a)) / n(i,a)) added to the improvement scores.
 * n(i,a) counts the evaluated policies that used a at i; never-used actions
 * get an infinite bonus while gamma > 0.
 */
ExplorationResult ucb_iteration(const MdpModel& model, const DeterministicPolicy& initial,
                                const ExplorationConfig& config);

struct GradientConfig {
  double stop_ratio = 1e-3;
  int max_iterations = 1000;
  // Uniform mixing weight used to evaluate iterates whose chain is reducible.
  double smoothing = 1e-6;
};

struct GradientResult {
  RandomizedPolicy theta;
  EvaluationReport report;
  GradientTrace trace;
  int iterations = 0;
  int smoothed_evaluations = 0;
};

/**
 * Randomized-policy gradient ascent: at iteration l every state adds
 * 1/sqrt(l) to the parameter of its max-gradient action and renormalizes.
 * Stops once max_i |theta_i^{l+1} - theta_i^l| / |theta_i^l| < stop_ratio.
 */
GradientResult gradient_solver(const MdpModel& model, const RandomizedPolicy& initial_theta,
                               const GradientConfig& config = {});

}  // namespace mvmdp
