#include "mvmdp/wind_storage.hpp"

#include <algorithm>
#include <cmath>

#include "mvmdp/error.hpp"

namespace mvmdp::wind {

WindStorageSpec WindStorageSpec::defaults(double beta, bool abandonment) {
  WindStorageSpec spec;
  for (const auto& row : kDefaultWindKernel) spec.wind_kernel.emplace_back(row.begin(), row.end());
  spec.beta = beta;
  spec.abandonment = abandonment;
  return spec;
}

int WindStorageSpec::min_action() const {
  return *std::min_element(charge_actions.begin(), charge_actions.end());
}

int WindStorageSpec::max_action() const {
  return *std::max_element(charge_actions.begin(), charge_actions.end());
}

void WindStorageSpec::validate() const {
  const int w = wind_levels();
  if (w < 1) throw ValidationError("wind kernel is empty");
  for (int x = 0; x < w; ++x) {
    if (static_cast<int>(wind_kernel[x].size()) != w)
      throw ValidationError("wind kernel row " + std::to_string(x) + " has the wrong length");
    double sum = 0.0;
    for (double p : wind_kernel[x]) {
      if (!(p >= 0.0)) throw ValidationError("wind kernel row " + std::to_string(x) + " is negative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
      throw ValidationError("wind kernel row " + std::to_string(x) + " does not sum to 1");
  }
  if (battery_capacity < 1) throw ValidationError("battery capacity must be at least 1");
  if (charge_actions.empty() ||
      std::find(charge_actions.begin(), charge_actions.end(), 0) == charge_actions.end())
    throw ValidationError("charge actions must contain 0");
  std::vector<int> sorted = charge_actions;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ValidationError("charge actions must be distinct");
  if (abandonment && sorted.back() - sorted.front() + 1 != static_cast<int>(sorted.size()))
    throw ValidationError("abandonment requires a contiguous integer action range");
  if (!(beta > 0.0)) throw ValidationError("beta must be positive");
}

int flat_index(const WindStorageSpec& spec, JointState state) {
  if (state.wind < 0 || state.wind >= spec.wind_levels() || state.battery < 0 ||
      state.battery > spec.battery_capacity)
    throw ValidationError("joint state out of range");
  return state.wind * spec.battery_levels() + state.battery;
}

JointState joint_state(const WindStorageSpec& spec, int index) {
  if (index < 0 || index >= spec.num_states()) throw ValidationError("state index out of range");
  return {index / spec.battery_levels(), index % spec.battery_levels()};
}

int num_action_indices(const WindStorageSpec& spec) {
  if (!spec.abandonment) return static_cast<int>(spec.charge_actions.size());
  return (spec.wind_levels() - 1) + spec.max_action() + 1;
}

int action_value(const WindStorageSpec& spec, int action_index) {
  if (action_index < 0 || action_index >= num_action_indices(spec))
    throw ValidationError("action index out of range");
  if (!spec.abandonment) {
    std::vector<int> sorted = spec.charge_actions;
    std::sort(sorted.begin(), sorted.end());
    return sorted[action_index];
  }
  return action_index - (spec.wind_levels() - 1);
}

int action_index(const WindStorageSpec& spec, int value) {
  for (int k = 0; k < num_action_indices(spec); ++k)
    if (action_value(spec, k) == value) return k;
  throw ValidationError("decision " + std::to_string(value) + " has no action index");
}

std::vector<int> feasible_decisions(const WindStorageSpec& spec, JointState state) {
  const int b = state.battery;
  const int cap = spec.battery_capacity;
  std::vector<int> out;
  if (!spec.abandonment) {
    for (int a : spec.charge_actions)
      if (b - cap <= a && a <= b && (!spec.nonnegative_output || a >= -state.wind)) out.push_back(a);
    std::sort(out.begin(), out.end());
  } else {
    for (int u = -state.wind; u <= std::min(spec.max_action(), b); ++u) out.push_back(u);
  }
  return out;
}

Decomposition decompose_action(const WindStorageSpec& spec, JointState state, int decision) {
  const auto feasible = feasible_decisions(spec, state);
  if (std::find(feasible.begin(), feasible.end(), decision) == feasible.end())
    throw ValidationError("decision " + std::to_string(decision) + " is not feasible at (wind " +
                          std::to_string(state.wind) + ", battery " +
                          std::to_string(state.battery) + ")");
  if (!spec.abandonment) return {decision, 0};
  const int floor = std::max(spec.min_action(), state.battery - spec.battery_capacity);
  if (decision >= floor) return {decision, 0};
  return {floor, floor - decision};
}

namespace {

MdpModel build_model(const WindStorageSpec& spec) {
  spec.validate();
  const int n = spec.num_states();
  MdpModel::Builder builder(n, num_action_indices(spec), spec.beta);
  for (int s = 0; s < n; ++s) {
    const JointState state = joint_state(spec, s);
    for (int decision : feasible_decisions(spec, state)) {
      const Decomposition split = decompose_action(spec, state, decision);
      const int next_battery = state.battery - split.battery_power;
      std::vector<double> row(n, 0.0);
      for (int x = 0; x < spec.wind_levels(); ++x)
        row[flat_index(spec, {x, next_battery})] += spec.wind_kernel[state.wind][x];
      builder.add_action(s, action_index(spec, decision), std::move(row),
                         static_cast<double>(state.wind + decision));
    }
  }
  return builder.build();
}

}  // namespace

MdpModel build_no_abandonment(const WindStorageSpec& spec) {
  if (spec.abandonment) throw ValidationError("spec selects the abandonment scenario");
  return build_model(spec);
}

MdpModel build_abandonment(const WindStorageSpec& spec) {
  if (!spec.abandonment) throw ValidationError("spec selects the no-abandonment scenario");
  return build_model(spec);
}

MdpModel build(const WindStorageSpec& spec) {
  return spec.abandonment ? build_abandonment(spec) : build_no_abandonment(spec);
}

InducedChain wind_chain(const WindStorageSpec& spec) {
  spec.validate();
  const int w = spec.wind_levels();
  InducedChain chain{Matrix(w, w), Vector(w), Vector(w), {}};
  chain.components.resize(w);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < w; ++y) chain.transition(x, y) = spec.wind_kernel[x][y];
    chain.reward(x) = x;
    chain.reward_second_moment(x) = static_cast<double>(x) * x;
    chain.components[x] = {{1.0, static_cast<double>(x)}};
  }
  return chain;
}

DeterministicPolicy idle_policy(const WindStorageSpec& spec) {
  return DeterministicPolicy(std::vector<int>(spec.num_states(), action_index(spec, 0)));
}

}  // namespace mvmdp::wind
