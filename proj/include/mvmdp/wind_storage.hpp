#pragma once

// Wind farm with a battery: state (wind level, battery level), action the
// battery (dis)charging power, reward the power delivered to the grid.

#include <array>
#include <vector>

#include "mvmdp/mdp.hpp"

namespace mvmdp::wind {

/// Hourly wind-level transition matrix, levels 0..5 MW.
inline constexpr std::array<std::array<double, 6>, 6> kDefaultWindKernel{{
    {0.53, 0.18, 0.19, 0.04, 0.01, 0.05},
    {0.51, 0.08, 0.20, 0.08, 0.02, 0.11},
    {0.35, 0.11, 0.19, 0.11, 0.03, 0.21},
    {0.27, 0.15, 0.15, 0.14, 0.03, 0.26},
    {0.14, 0.11, 0.13, 0.15, 0.05, 0.42},
    {0.09, 0.03, 0.06, 0.06, 0.03, 0.73},
}};

struct WindStorageSpec {
  std::vector<std::vector<double>> wind_kernel;  // level k means k MW
  int battery_capacity = 5;                      // MWh; levels 0..B
  std::vector<int> charge_actions{-2, -1, 0, 1, 2};  // MW, positive discharges
  double beta = 0.1;
  bool abandonment = false;
  // Without abandonment, forbid charging more than the current wind output.
  bool nonnegative_output = true;

  static WindStorageSpec defaults(double beta = 0.1, bool abandonment = false);

  int wind_levels() const noexcept { return static_cast<int>(wind_kernel.size()); }
  int battery_levels() const noexcept { return battery_capacity + 1; }
  int num_states() const noexcept { return wind_levels() * battery_levels(); }
  int min_action() const;
  int max_action() const;

  /// Throws ValidationError unless the kernel is stochastic, B >= 1 and 0 is an action.
  void validate() const;
};

struct JointState {
  int wind = 0;     // MW
  int battery = 0;  // MWh

  bool operator==(const JointState&) const = default;
};

int flat_index(const WindStorageSpec& spec, JointState state);
JointState joint_state(const WindStorageSpec& spec, int index);

/// Number of action indices in the model built from `spec`.
int num_action_indices(const WindStorageSpec& spec);
/// Physical decision (A without abandonment, U with abandonment) of an action index.
int action_value(const WindStorageSpec& spec, int action_index);
int action_index(const WindStorageSpec& spec, int value);

struct Decomposition {
  int battery_power;  // A
  int abandoned;      // V, with U = A - V
};

/// Splits the abandonment decision U into battery power A and abandoned wind V.
Decomposition decompose_action(const WindStorageSpec& spec, JointState state, int decision);

/// Feasible physical decisions at a state, ascending.
std::vector<int> feasible_decisions(const WindStorageSpec& spec, JointState state);

MdpModel build_no_abandonment(const WindStorageSpec& spec);
MdpModel build_abandonment(const WindStorageSpec& spec);
/// Dispatches on spec.abandonment.
MdpModel build(const WindStorageSpec& spec);

/// The 6-state wind chain with reward equal to the wind power.
InducedChain wind_chain(const WindStorageSpec& spec);

/// Policy choosing decision 0 everywhere (never uses the battery).
DeterministicPolicy idle_policy(const WindStorageSpec& spec);

}  // namespace mvmdp::wind
