#pragma once

// Finite MDP model, policy representations and the Markov chains they induce.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mvmdp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Tolerance on transition-row and policy-row sums.
inline constexpr double kRowSumTolerance = 1e-12;

/**
 * Finite MDP with state-dependent feasible action sets.
 *
 * The kernel p^a(i, .) and reward r(i, a) exist only for feasible (i, a).
 * Instances are immutable; use MdpModel::Builder to assemble one. Every
 * invariant (stochastic rows, at least one action per state, beta > 0) is
 * checked by Builder::build().
 */
class MdpModel {
 public:
  class Builder {
   public:
    Builder(int num_states, int num_actions, double beta);

    /// Declares (state, action) feasible with its transition row and reward.
    Builder& add_action(int state, int action, std::vector<double> row, double reward);

    MdpModel build() const;

   private:
    int num_states_;
    int num_actions_;
    double beta_;
    std::vector<char> defined_;
    std::vector<double> kernel_;
    std::vector<double> reward_;
  };

  int num_states() const noexcept { return num_states_; }
  int num_actions() const noexcept { return num_actions_; }
  double beta() const noexcept { return beta_; }

  /// Feasible actions at `state`, ascending.
  const std::vector<int>& feasible(int state) const { return feasible_.at(state); }
  bool is_feasible(int state, int action) const noexcept;

  /// p^action(state, .); throws FeasibilityError for an infeasible pair.
  std::span<const double> transition(int state, int action) const;
  double reward(int state, int action) const;

  /// Same dynamics and rewards with a different risk weight.
  MdpModel with_beta(double beta) const;

  /// Number of deterministic policies, saturating at UINT64_MAX.
  std::uint64_t policy_count() const noexcept;

  bool operator==(const MdpModel&) const = default;

 private:
  MdpModel() = default;

  std::size_t pair_index(int state, int action) const noexcept {
    return static_cast<std::size_t>(state) * num_actions_ + action;
  }

  int num_states_ = 0;
  int num_actions_ = 0;
  double beta_ = 0.0;
  std::vector<std::vector<int>> feasible_;
  std::vector<char> defined_;
  std::vector<double> kernel_;  // (state, action, next) row-major
  std::vector<double> reward_;  // (state, action)
};

/// Stationary deterministic policy d: state -> action.
class DeterministicPolicy {
 public:
  DeterministicPolicy() = default;
  explicit DeterministicPolicy(std::vector<int> actions) : actions_(std::move(actions)) {}

  int operator[](int state) const { return actions_.at(state); }
  void set(int state, int action) { actions_.at(state) = action; }
  int size() const noexcept { return static_cast<int>(actions_.size()); }
  const std::vector<int>& actions() const noexcept { return actions_; }

  auto operator<=>(const DeterministicPolicy&) const = default;

  std::string to_string() const;

 private:
  std::vector<int> actions_;
};

/// Randomized stationary policy; row i of theta is a distribution over actions.
class RandomizedPolicy {
 public:
  RandomizedPolicy() = default;
  explicit RandomizedPolicy(Matrix theta) : theta_(std::move(theta)) {}

  static RandomizedPolicy one_hot(const DeterministicPolicy& policy, int num_actions);
  /// Uniform over the feasible actions of every state.
  static RandomizedPolicy uniform(const class MdpModel& model);

  const Matrix& theta() const noexcept { return theta_; }
  Matrix& theta() noexcept { return theta_; }
  double operator()(int state, int action) const { return theta_(state, action); }
  int num_states() const noexcept { return static_cast<int>(theta_.rows()); }

 private:
  Matrix theta_;
};

/// Plays `base` with probability 1 - delta and `alt` with probability delta.
struct MixedPolicy {
  DeterministicPolicy base;
  DeterministicPolicy alt;
  double delta = 0.0;
};

/// One reward outcome of the per-state action mixture.
struct RewardComponent {
  double weight;
  double reward;
};

/// Markov chain (P, r) induced by a policy, plus the per-state reward mixture.
struct InducedChain {
  Matrix transition;
  Vector reward;                 // mean one-step reward per state
  Vector reward_second_moment;   // sum_a w_a r(i,a)^2
  std::vector<std::vector<RewardComponent>> components;

  int num_states() const noexcept { return static_cast<int>(reward.size()); }

  /// Per-state sum_a w_a (r(i,a) - center)^2.
  Vector squared_deviation(double center) const;
  /// Per-state sum_a w_a [r(i,a) - beta (r(i,a) - center)^2].
  Vector mean_variance_cost(double center, double beta) const;
};

void validate(const MdpModel& model, const DeterministicPolicy& policy);
void validate(const MdpModel& model, const RandomizedPolicy& policy);
void validate(const MdpModel& model, const MixedPolicy& policy);

InducedChain induced_chain(const MdpModel& model, const DeterministicPolicy& policy);
InducedChain induced_chain(const MdpModel& model, const RandomizedPolicy& policy);
InducedChain induced_chain(const MdpModel& model, const MixedPolicy& policy);

/// Strong connectivity of the nonzero-support graph of a square matrix.
bool is_irreducible(const Matrix& transition);

/// Exactly one closed communicating class (transient states allowed). This is
/// what a unique stationary distribution needs.
bool is_unichain(const Matrix& transition);

/// Uniform draw over the feasible actions of every state.
DeterministicPolicy random_policy(const MdpModel& model, std::mt19937_64& rng);

enum class ErgodicityCheckMode { exhaustive, sampled };

struct ErgodicityOptions {
  std::uint64_t enumeration_cap = 1'000'000;
  std::uint64_t samples = 1000;
  std::uint64_t seed = 0;
  std::size_t max_reported = 16;
};

struct ErgodicityReport {
  ErgodicityCheckMode mode = ErgodicityCheckMode::exhaustive;
  std::uint64_t policies_checked = 0;
  bool union_irreducible = false;
  std::uint64_t violation_count = 0;            // not irreducible
  std::uint64_t multichain_count = 0;           // not even unichain, so not evaluable
  std::vector<DeterministicPolicy> violations;  // first max_reported non-irreducible policies

  bool ok() const noexcept { return union_irreducible && violation_count == 0; }
};

/**
 * Checks that deterministic policies induce irreducible chains, and counts
 * separately the ones that are not even unichain.
 *
 * Enumerates all policies when there are at most `enumeration_cap` of them,
 * otherwise checks the union-support chain plus `samples` random policies.
 * Never throws on a violation; the report lists offenders.
 */
ErgodicityReport check_ergodicity(const MdpModel& model, const ErgodicityOptions& options = {});

const char* to_string(ErgodicityCheckMode mode) noexcept;

}  // namespace mvmdp
