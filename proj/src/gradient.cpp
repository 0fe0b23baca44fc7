#include <cmath>

#include "mvmdp/error.hpp"
#include "mvmdp/solvers.hpp"

namespace mvmdp {

namespace {

struct ThetaEvaluation {
  RandomizedPolicy evaluated;  // theta itself, or its smoothed version
  EvaluationReport report;
  bool smoothed = false;
};

// An iterate with several closed classes (e.g. a deterministic start that
// never moves the battery) has no unique stationary distribution; its
// gradient is taken at (1 - eps) theta + eps uniform instead.
ThetaEvaluation evaluate_theta(const MdpModel& model, const RandomizedPolicy& theta,
                               double smoothing) {
  InducedChain chain = induced_chain(model, theta);
  if (is_unichain(chain.transition))
    return {theta, evaluate_chain(chain, model.beta()), false};
  if (!(smoothing > 0.0 && smoothing < 1.0))
    throw SolverError("randomized iterate has more than one closed class and smoothing is disabled");
  Matrix mixed = (1.0 - smoothing) * theta.theta() +
                 smoothing * RandomizedPolicy::uniform(model).theta();
  for (int i = 0; i < mixed.rows(); ++i) mixed.row(i) /= mixed.row(i).sum();
  RandomizedPolicy smoothed(std::move(mixed));
  chain = induced_chain(model, smoothed);
  if (!is_unichain(chain.transition))
    throw SolverError("smoothed randomized iterate still has more than one closed class");
  return {std::move(smoothed), evaluate_chain(chain, model.beta()), true};
}

Eigen::VectorXi dominant_actions(const Matrix& theta) {
  Eigen::VectorXi out(theta.rows());
  for (Eigen::Index i = 0; i < theta.rows(); ++i) theta.row(i).maxCoeff(&out(i));
  return out;
}

IterationRecord<RandomizedPolicy> make_record(int iteration, const RandomizedPolicy& theta,
                                              const EvaluationReport& report, int changed) {
  return {iteration, theta, report.j_mean, report.j_var, report.j_combined, changed};
}

}  // namespace

GradientResult gradient_solver(const MdpModel& model, const RandomizedPolicy& initial_theta,
                               const GradientConfig& config) {
  validate(model, initial_theta);
  if (!(config.stop_ratio > 0.0)) throw ValidationError("stop_ratio must be positive");
  if (config.max_iterations < 1) throw ValidationError("max_iterations must be at least 1");

  GradientResult result;
  RandomizedPolicy theta = initial_theta;
  Eigen::VectorXi previous_dominant = dominant_actions(theta.theta());
  result.trace.stop_reason = StopReason::max_iterations;

  for (int l = 1; l <= config.max_iterations; ++l) {
    const ThetaEvaluation eval = evaluate_theta(model, theta, config.smoothing);
    result.smoothed_evaluations += eval.smoothed;
    const Eigen::VectorXi dominant = dominant_actions(theta.theta());
    const int changed = static_cast<int>((dominant.array() != previous_dominant.array()).count());
    previous_dominant = dominant;
    result.trace.iterations.push_back(make_record(l - 1, theta, eval.report, changed));

    const StateActionTable grad = derivative_randomized(model, eval.evaluated, eval.report);
    const double step = 1.0 / std::sqrt(static_cast<double>(l));
    Matrix next = theta.theta();
    double max_ratio = 0.0;
    for (int i = 0; i < model.num_states(); ++i) {
      next(i, grad.argmax(i).first) += step;
      next.row(i) /= next.row(i).sum();
      const double ratio = (next.row(i) - theta.theta().row(i)).norm() / theta.theta().row(i).norm();
      max_ratio = std::max(max_ratio, ratio);
    }
    theta = RandomizedPolicy(std::move(next));
    result.iterations = l;
    if (max_ratio < config.stop_ratio) {
      result.trace.converged = true;
      result.trace.stop_reason = StopReason::threshold;
      break;
    }
  }

  ThetaEvaluation final_eval = evaluate_theta(model, theta, config.smoothing);
  result.smoothed_evaluations += final_eval.smoothed;
  const Eigen::VectorXi dominant = dominant_actions(theta.theta());
  result.trace.iterations.push_back(
      make_record(result.iterations, theta, final_eval.report,
                  static_cast<int>((dominant.array() != previous_dominant.array()).count())));
  result.report = std::move(final_eval.report);
  result.theta = std::move(theta);
  return result;
}

}  // namespace mvmdp
