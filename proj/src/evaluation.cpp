#include "mvmdp/evaluation.hpp"

#include <cmath>
#include <sstream>

#include "mvmdp/error.hpp"

namespace mvmdp {

namespace {

constexpr double kPotentialTolerance = 1e-8;

void require_same_size(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << what << ": length mismatch (" << a.size() << " vs " << b.size() << ")";
    throw ValidationError(os.str());
  }
}

void require_square(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw ValidationError("transition matrix must be square and nonempty");
}

// (I - P) g = rhs, solved with g(ref) = 0 at a recurrent reference state and
// then shifted so that g(0) = 0. Deleting row and column ref leaves a
// nonsingular block because every state of a unichain reaches ref; the
// dropped balance equation is implied by the others once the gain matches.
class PinnedPoissonSolver {
 public:
  PinnedPoissonSolver(const Matrix& transition, const Vector& pi) : n_(transition.rows()) {
    pi.maxCoeff(&ref_);
    if (n_ > 1) {
      const auto m = n_ - 1;
      Eigen::MatrixXd block(m, m);
      for (Eigen::Index i = 0, bi = 0; i < n_; ++i) {
        if (i == ref_) continue;
        for (Eigen::Index j = 0, bj = 0; j < n_; ++j) {
          if (j == ref_) continue;
          block(bi, bj) = (i == j ? 1.0 : 0.0) - transition(i, j);
          ++bj;
        }
        ++bi;
      }
      lu_.compute(block);
    }
  }

  Vector solve(const Vector& cost, double gain) const {
    Vector g = Vector::Zero(n_);
    if (n_ > 1) {
      Eigen::VectorXd rhs(n_ - 1);
      for (Eigen::Index i = 0, bi = 0; i < n_; ++i)
        if (i != ref_) rhs(bi++) = cost(i) - gain;
      const Eigen::VectorXd x = lu_.solve(rhs);
      for (Eigen::Index i = 0, bi = 0; i < n_; ++i)
        if (i != ref_) g(i) = x(bi++);
      g.array() -= g(0);
    }
    return g;
  }

 private:
  Eigen::Index n_;
  Eigen::Index ref_ = 0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

void check_gain(const Vector& pi, const Vector& cost, double gain) {
  const double expected = pi.dot(cost);
  if (!(std::abs(expected - gain) <= kGainConsistencyTolerance)) {
    std::ostringstream os;
    os.precision(17);
    os << "inconsistent gain: supplied " << gain << " but pi*f = " << expected
       << "; the Poisson equation has no solution";
    throw EvaluationError(os.str());
  }
}

}  // namespace

Vector stationary_distribution(const Matrix& transition) {
  require_square(transition);
  if (!is_unichain(transition))
    throw EvaluationError(
        "chain has more than one closed class: stationary distribution is not unique");
  const auto n = transition.rows();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - transition.transpose();
  system.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Vector pi = system.partialPivLu().solve(rhs);
  if (!pi.allFinite() || pi.minCoeff() < -1e-12 ||
      (pi.transpose() * transition - pi.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw EvaluationError("stationary distribution solve is numerically singular");
  return pi.cwiseMax(0.0);
}

double long_run_mean(const Vector& pi, const Vector& reward) {
  require_same_size(pi, reward, "long_run_mean");
  return pi.dot(reward);
}

double steady_state_variance(const Vector& pi, const Vector& reward, double mean) {
  require_same_size(pi, reward, "steady_state_variance");
  return pi.dot((reward.array() - mean).square().matrix());
}

double steady_state_variance(const Vector& pi, const InducedChain& chain, double mean) {
  require_same_size(pi, chain.reward, "steady_state_variance");
  return pi.dot(chain.squared_deviation(mean));
}

double combined_metric(double mean, double variance, double beta) { return mean - beta * variance; }

Vector mv_cost_vector(const Vector& reward, double mean, double beta) {
  if (!(beta > 0.0)) throw ValidationError("beta must be positive");
  return (reward.array() - beta * (reward.array() - mean).square()).matrix();
}

Vector solve_poisson(const Matrix& transition, const Vector& cost, double gain) {
  return solve_poisson(transition, cost, gain, stationary_distribution(transition));
}

Vector solve_poisson(const Matrix& transition, const Vector& cost, double gain, const Vector& pi) {
  require_square(transition);
  require_same_size(pi, cost, "solve_poisson");
  if (transition.rows() != cost.size()) throw ValidationError("solve_poisson: dimension mismatch");
  check_gain(pi, cost, gain);
  return PinnedPoissonSolver(transition, pi).solve(cost, gain);
}

double poisson_residual(const Matrix& transition, const Vector& cost, double gain,
                        const Vector& potential) {
  const Vector r = potential - cost + Vector::Constant(cost.size(), gain) - transition * potential;
  return r.cwiseAbs().maxCoeff();
}

EvaluationReport evaluate_chain(const InducedChain& chain, double beta) {
  if (!(beta > 0.0)) throw ValidationError("beta must be positive");
  EvaluationReport report;
  report.beta = beta;
  report.pi = stationary_distribution(chain.transition);
  report.j_mean = long_run_mean(report.pi, chain.reward);
  const Vector deviation = chain.squared_deviation(report.j_mean);
  report.j_var = report.pi.dot(deviation);
  report.j_combined = combined_metric(report.j_mean, report.j_var, beta);
  report.cost = chain.mean_variance_cost(report.j_mean, beta);

  check_gain(report.pi, report.cost, report.j_combined);
  check_gain(report.pi, chain.reward, report.j_mean);
  check_gain(report.pi, deviation, report.j_var);

  const PinnedPoissonSolver solver(chain.transition, report.pi);
  report.potential = solver.solve(report.cost, report.j_combined);
  report.potential_mean = solver.solve(chain.reward, report.j_mean);
  report.potential_var = solver.solve(deviation, report.j_var);

  const double residual =
      poisson_residual(chain.transition, report.cost, report.j_combined, report.potential);
  const double split =
      (report.potential - (report.potential_mean - beta * report.potential_var)).cwiseAbs().maxCoeff();
  if (!(residual <= kPotentialTolerance) || !(split <= kPotentialTolerance))
    throw EvaluationError("Poisson solve lost accuracy (residual " + std::to_string(residual) + ")");
  return report;
}

EvaluationReport evaluate(const MdpModel& model, const DeterministicPolicy& policy) {
  return evaluate_chain(induced_chain(model, policy), model.beta());
}

EvaluationReport evaluate(const MdpModel& model, const RandomizedPolicy& policy) {
  return evaluate_chain(induced_chain(model, policy), model.beta());
}

}  // namespace mvmdp
