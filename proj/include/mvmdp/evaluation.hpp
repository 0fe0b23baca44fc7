#pragma once

// Exact evaluation of a stationary policy: stationary distribution, long-run
// mean, steady-state variance, mean-variance cost and performance potentials.

#include "mvmdp/mdp.hpp"

namespace mvmdp {

/// Allowed gap between a supplied gain J and pi * f.
inline constexpr double kGainConsistencyTolerance = 1e-9;

struct EvaluationReport {
  Vector pi;              // stationary distribution
  double j_mean = 0.0;    // long-run average reward
  double j_var = 0.0;     // steady-state variance of the reward
  double j_combined = 0.0;
  Vector cost;            // f(i) = sum_a w [r - beta (r - j_mean)^2]
  Vector potential;       // g, pinned at g(0) = 0
  Vector potential_mean;  // g_mu, cost r
  Vector potential_var;   // g_sigma, cost (r - j_mean)^2
  double beta = 0.0;
};

/// Unique pi with pi P = pi, pi 1 = 1. Throws EvaluationError unless P is unichain.
Vector stationary_distribution(const Matrix& transition);

double long_run_mean(const Vector& pi, const Vector& reward);

/// sum_i pi(i) (r(i) - mean)^2
double steady_state_variance(const Vector& pi, const Vector& reward, double mean);
/// Per-action mixture form, sum_i pi(i) sum_a w (r(i,a) - mean)^2.
double steady_state_variance(const Vector& pi, const InducedChain& chain, double mean);

double combined_metric(double mean, double variance, double beta);

/// f(i) = r(i) - beta (r(i) - mean)^2; beta must be positive.
Vector mv_cost_vector(const Vector& reward, double mean, double beta);

/**
 * Solves g = f - gain 1 + P g with g(0) = 0.
 *
 * The gain has to equal pi f within kGainConsistencyTolerance, otherwise the
 * system has no solution and EvaluationError is thrown.
 */
Vector solve_poisson(const Matrix& transition, const Vector& cost, double gain);
Vector solve_poisson(const Matrix& transition, const Vector& cost, double gain, const Vector& pi);

/// max_i |g - f + gain - P g|
double poisson_residual(const Matrix& transition, const Vector& cost, double gain,
                        const Vector& potential);

EvaluationReport evaluate_chain(const InducedChain& chain, double beta);
EvaluationReport evaluate(const MdpModel& model, const DeterministicPolicy& policy);
EvaluationReport evaluate(const MdpModel& model, const RandomizedPolicy& policy);

}  // namespace mvmdp
