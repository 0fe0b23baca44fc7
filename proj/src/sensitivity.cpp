#include "mvmdp/sensitivity.hpp"

#include <cmath>
#include <limits>

#include "mvmdp/error.hpp"

namespace mvmdp {

namespace {

constexpr double kReportTolerance = 1e-8;

double expected_potential(const MdpModel& model, int state, int action, const Vector& potential) {
  const auto row = model.transition(state, action);
  double acc = 0.0;
  for (int j = 0; j < model.num_states(); ++j) acc += row[j] * potential(j);
  return acc;
}

void check_report(const MdpModel& model, const InducedChain& chain, const EvaluationReport& report) {
  if (report.potential.size() != model.num_states() || report.pi.size() != model.num_states())
    throw ValidationError("evaluation report does not match the model dimensions");
  if (report.beta != model.beta())
    throw ValidationError("evaluation report was computed with a different beta");
  const Vector cost = chain.mean_variance_cost(report.j_mean, report.beta);
  const double residual =
      poisson_residual(chain.transition, cost, report.j_combined, report.potential);
  if (!(residual <= kReportTolerance))
    throw ValidationError("evaluation report does not belong to the policy (Poisson residual " +
                          std::to_string(residual) + ")");
}

}  // namespace

StateActionTable::StateActionTable(int num_states, int num_actions)
    : values_(Matrix::Zero(num_states, num_actions)),
      defined_(static_cast<std::size_t>(num_states) * num_actions, 0) {}

bool StateActionTable::defined(int state, int action) const {
  if (state < 0 || state >= num_states() || action < 0 || action >= num_actions()) return false;
  return defined_[static_cast<std::size_t>(state) * num_actions() + action] != 0;
}

double StateActionTable::at(int state, int action) const {
  if (!defined(state, action))
    throw ValidationError("no value for state " + std::to_string(state) + ", action " +
                          std::to_string(action));
  return values_(state, action);
}

void StateActionTable::set(int state, int action, double value) {
  if (state < 0 || state >= num_states() || action < 0 || action >= num_actions())
    throw ValidationError("state-action index out of range");
  values_(state, action) = value;
  defined_[static_cast<std::size_t>(state) * num_actions() + action] = 1;
}

std::pair<int, double> StateActionTable::argmax(int state) const {
  int best = -1;
  double value = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < num_actions(); ++a)
    if (defined(state, a) && (best < 0 || values_(state, a) > value)) {
      best = a;
      value = values_(state, a);
    }
  if (best < 0) throw ValidationError("no defined action at state " + std::to_string(state));
  return {best, value};
}

StateActionTable improvement_scores(const MdpModel& model, double j_mean, const Vector& potential) {
  const double beta = model.beta();
  StateActionTable table(model.num_states(), model.num_actions());
  for (int i = 0; i < model.num_states(); ++i)
    for (int a : model.feasible(i)) {
      const double r = model.reward(i, a);
      table.set(i, a, r - beta * (r - j_mean) * (r - j_mean) + expected_potential(model, i, a, potential));
    }
  return table;
}

ImprovementVector improvement_vector(const MdpModel& model, const EvaluationReport& report,
                                     const DeterministicPolicy& policy) {
  check_report(model, induced_chain(model, policy), report);
  ImprovementVector out{improvement_scores(model, report.j_mean, report.potential),
                        Vector(model.num_states())};
  for (int i = 0; i < model.num_states(); ++i) out.current_score(i) = out.score.at(i, policy[i]);
  return out;
}

DifferenceBreakdown predicted_difference(const MdpModel& model,
                                         const DeterministicPolicy& base_policy,
                                         const EvaluationReport& base_report,
                                         const DeterministicPolicy& new_policy) {
  const ImprovementVector scores = improvement_vector(model, base_report, base_policy);
  validate(model, new_policy);
  const EvaluationReport next = evaluate(model, new_policy);

  DifferenceBreakdown out;
  for (int i = 0; i < model.num_states(); ++i)
    out.linear_part += next.pi(i) * (scores.score.at(i, new_policy[i]) - scores.current_score(i));
  const double shift = next.j_mean - base_report.j_mean;
  out.square_part = model.beta() * shift * shift;
  out.total = out.linear_part + out.square_part;
  out.direct = next.j_combined - base_report.j_combined;
  return out;
}

std::vector<Violation> check_necessary_condition(const MdpModel& model,
                                                 const EvaluationReport& report,
                                                 const DeterministicPolicy& policy) {
  const ImprovementVector scores = improvement_vector(model, report, policy);
  std::vector<Violation> out;
  for (int i = 0; i < model.num_states(); ++i)
    for (int a : model.feasible(i)) {
      const double margin = scores.score.at(i, a) - scores.current_score(i);
      if (margin > kImprovementMargin) out.push_back({i, a, margin});
    }
  return out;
}

double derivative_mixed(const MdpModel& model, const DeterministicPolicy& base_policy,
                        const EvaluationReport& base_report, const DeterministicPolicy& alt_policy) {
  const ImprovementVector scores = improvement_vector(model, base_report, base_policy);
  validate(model, alt_policy);
  double acc = 0.0;
  for (int i = 0; i < model.num_states(); ++i)
    acc += base_report.pi(i) * (scores.score.at(i, alt_policy[i]) - scores.current_score(i));
  return acc;
}

StateActionTable derivative_randomized(const MdpModel& model, const RandomizedPolicy& theta,
                                       const EvaluationReport& theta_report) {
  check_report(model, induced_chain(model, theta), theta_report);
  const double beta = model.beta();
  const double mean = theta_report.j_mean;
  StateActionTable grad(model.num_states(), model.num_actions());
  for (int i = 0; i < model.num_states(); ++i)
    for (int a : model.feasible(i)) {
      const double r = model.reward(i, a);
      const double bracket = expected_potential(model, i, a, theta_report.potential) + r -
                             beta * r * r + 2.0 * beta * mean * r;
      grad.set(i, a, theta_report.pi(i) * bracket);
    }
  return grad;
}

}  // namespace mvmdp
