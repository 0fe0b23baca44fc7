#pragma once

// Sensitivity quantities of the mean-variance metric: per-action improvement
// scores, the exact two-policy difference formula and first-order derivatives
// in the mixed and randomized policy spaces.

#include <vector>

#include "mvmdp/evaluation.hpp"
#include "mvmdp/mdp.hpp"

namespace mvmdp {

/// Scores below this margin over the current action count as ties.
inline constexpr double kImprovementMargin = 1e-9;

/**
 * Real values attached to feasible (state, action) pairs.
 *
 * Infeasible pairs carry no value; `defined` tells them apart and `at`
 * throws on them.
 */
class StateActionTable {
 public:
  StateActionTable() = default;
  StateActionTable(int num_states, int num_actions);

  int num_states() const noexcept { return static_cast<int>(values_.rows()); }
  int num_actions() const noexcept { return static_cast<int>(values_.cols()); }

  bool defined(int state, int action) const;
  double at(int state, int action) const;
  void set(int state, int action, double value);

  /// Largest value at `state` and the lowest action attaining it.
  std::pair<int, double> argmax(int state) const;

 private:
  Matrix values_;
  std::vector<char> defined_;
};

struct ImprovementVector {
  StateActionTable score;  // r - beta (r - J_mu)^2 + sum_j p^a(i,j) g(j)
  Vector current_score;    // score(i, d(i))
};

struct DifferenceBreakdown {
  double linear_part = 0.0;
  double square_part = 0.0;
  double total = 0.0;
  double direct = 0.0;  // J'_combined - J_combined from two evaluations
};

struct Violation {
  int state;
  int action;
  double margin;  // score(state, action) - current_score(state)
};

/// Scores every feasible pair against the evaluated policy. The report is
/// checked against the policy via the Poisson residual.
ImprovementVector improvement_vector(const MdpModel& model, const EvaluationReport& report,
                                     const DeterministicPolicy& policy);

/// Same scores without the report consistency check, potentials supplied directly.
StateActionTable improvement_scores(const MdpModel& model, double j_mean, const Vector& potential);

DifferenceBreakdown predicted_difference(const MdpModel& model,
                                         const DeterministicPolicy& base_policy,
                                         const EvaluationReport& base_report,
                                         const DeterministicPolicy& new_policy);

/// Pairs whose score beats the current action by more than kImprovementMargin.
std::vector<Violation> check_necessary_condition(const MdpModel& model,
                                                 const EvaluationReport& report,
                                                 const DeterministicPolicy& policy);

/// dJ/d(delta) at delta = 0 for the mixture of base (weight 1 - delta) and alt.
double derivative_mixed(const MdpModel& model, const DeterministicPolicy& base_policy,
                        const EvaluationReport& base_report, const DeterministicPolicy& alt_policy);

/// dJ/d(theta_{i,a}) for every feasible pair.
StateActionTable derivative_randomized(const MdpModel& model, const RandomizedPolicy& theta,
                                       const EvaluationReport& theta_report);

}  // namespace mvmdp
