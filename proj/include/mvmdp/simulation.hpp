#pragma once

// Monte Carlo estimates of the long-run metrics and potentials, used as an
// independent check on the analytic evaluation.

#include <cstdint>
#include <variant>
#include <vector>

#include "mvmdp/mdp.hpp"

namespace mvmdp {

using AnyPolicy = std::variant<DeterministicPolicy, RandomizedPolicy>;

struct SamplePath {
  std::vector<int> states;
  std::vector<int> actions;
  std::vector<double> rewards;

  std::size_t size() const noexcept { return rewards.size(); }
};

struct SimulationOptions {
  std::uint64_t burn_in = 0;  // steps simulated and discarded before recording
};

/// T recorded steps starting from `start_state` (after any burn-in).
SamplePath simulate_path(const MdpModel& model, const AnyPolicy& policy, std::uint64_t horizon,
                         std::uint64_t seed, int start_state, const SimulationOptions& options = {});

struct SimulationEstimate {
  double j_mean_hat = 0.0;
  double j_var_hat = 0.0;
  double j_combined_hat = 0.0;
  double mean_half_width = 0.0;  // 95% batch-means half-widths
  double var_half_width = 0.0;
  double combined_half_width = 0.0;
  std::uint64_t horizon = 0;
  std::uint64_t seed = 0;
  int batches = 0;
};

inline constexpr int kDefaultBatches = 30;

/// Time-average estimates with batch-means confidence half-widths.
SimulationEstimate estimate_metrics(const SamplePath& path, double beta,
                                    int batches = kDefaultBatches);

struct PotentialEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/**
 * Truncated-sum estimate of g(state) re-pinned so that g(0) = 0.
 *
 * `cost` is the per-state cost f of the policy and `gain` the analytic (or
 * pre-estimated) J_combined. Each replication sums f(X_t) - gain over
 * t = 0..truncation.
 */
PotentialEstimate estimate_potential(const MdpModel& model, const AnyPolicy& policy,
                                     const Vector& cost, double gain, int state, int truncation,
                                     int replications, std::uint64_t seed);

}  // namespace mvmdp
