#include "mvmdp/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mvmdp/error.hpp"

namespace mvmdp {

namespace {

std::string pair_name(int state, int action) {
  return "\"" + std::to_string(state) + "," + std::to_string(action) + "\"";
}

std::vector<char> reachable(const Matrix& transition, bool reverse, Eigen::Index from = 0) {
  const auto n = transition.rows();
  std::vector<char> seen(n, 0);
  std::vector<Eigen::Index> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double p = reverse ? transition(j, i) : transition(i, j);
      if (p > 0.0 && !seen[j]) {
        seen[j] = 1;
        stack.push_back(j);
      }
    }
  }
  return seen;
}

}  // namespace

MdpModel::Builder::Builder(int num_states, int num_actions, double beta)
    : num_states_(num_states), num_actions_(num_actions), beta_(beta) {
  if (num_states <= 0) throw ValidationError("num_states must be positive");
  if (num_actions <= 0) throw ValidationError("num_actions must be positive");
  const auto pairs = static_cast<std::size_t>(num_states) * num_actions;
  defined_.assign(pairs, 0);
  kernel_.assign(pairs * num_states, 0.0);
  reward_.assign(pairs, 0.0);
}

MdpModel::Builder& MdpModel::Builder::add_action(int state, int action, std::vector<double> row,
                                                 double reward) {
  if (state < 0 || state >= num_states_)
    throw ValidationError("state " + std::to_string(state) + " out of range");
  if (action < 0 || action >= num_actions_)
    throw ValidationError("action " + std::to_string(action) + " out of range at state " +
                          std::to_string(state));
  const auto idx = static_cast<std::size_t>(state) * num_actions_ + action;
  if (defined_[idx]) throw ValidationError("duplicate kernel row " + pair_name(state, action));
  if (static_cast<int>(row.size()) != num_states_)
    throw ValidationError("kernel row " + pair_name(state, action) + " has length " +
                          std::to_string(row.size()) + ", expected " + std::to_string(num_states_));
  if (!std::isfinite(reward))
    throw ValidationError("reward " + pair_name(state, action) + " is not finite");
  double sum = 0.0;
  for (int j = 0; j < num_states_; ++j) {
    if (!(row[j] >= 0.0) || !std::isfinite(row[j]))
      throw ValidationError("kernel row " + pair_name(state, action) + " has invalid entry at " +
                            std::to_string(j));
    sum += row[j];
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "kernel row " << pair_name(state, action) << " sums to " << sum << ", expected 1";
    throw ValidationError(os.str());
  }
  defined_[idx] = 1;
  std::copy(row.begin(), row.end(), kernel_.begin() + static_cast<std::ptrdiff_t>(idx * num_states_));
  reward_[idx] = reward;
  return *this;
}

MdpModel MdpModel::Builder::build() const {
  if (!(beta_ > 0.0) || !std::isfinite(beta_)) throw ValidationError("beta must be positive");
  MdpModel model;
  model.num_states_ = num_states_;
  model.num_actions_ = num_actions_;
  model.beta_ = beta_;
  model.defined_ = defined_;
  model.kernel_ = kernel_;
  model.reward_ = reward_;
  model.feasible_.resize(num_states_);
  for (int i = 0; i < num_states_; ++i) {
    for (int a = 0; a < num_actions_; ++a)
      if (defined_[static_cast<std::size_t>(i) * num_actions_ + a]) model.feasible_[i].push_back(a);
    if (model.feasible_[i].empty())
      throw ValidationError("state " + std::to_string(i) + " has no feasible action");
  }
  return model;
}

bool MdpModel::is_feasible(int state, int action) const noexcept {
  if (state < 0 || state >= num_states_ || action < 0 || action >= num_actions_) return false;
  return defined_[pair_index(state, action)] != 0;
}

std::span<const double> MdpModel::transition(int state, int action) const {
  if (!is_feasible(state, action))
    throw FeasibilityError(state, action,
                           "action " + std::to_string(action) + " is not feasible at state " +
                               std::to_string(state));
  return {kernel_.data() + pair_index(state, action) * num_states_,
          static_cast<std::size_t>(num_states_)};
}

double MdpModel::reward(int state, int action) const {
  if (!is_feasible(state, action))
    throw FeasibilityError(state, action,
                           "action " + std::to_string(action) + " is not feasible at state " +
                               std::to_string(state));
  return reward_[pair_index(state, action)];
}

MdpModel MdpModel::with_beta(double beta) const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
  MdpModel copy = *this;
  copy.beta_ = beta;
  return copy;
}

std::uint64_t MdpModel::policy_count() const noexcept {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t count = 1;
  for (const auto& actions : feasible_) {
    const auto k = static_cast<std::uint64_t>(actions.size());
    if (count > kMax / k) return kMax;
    count *= k;
  }
  return count;
}

std::string DeterministicPolicy::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(actions_[i]);
  }
  return out + "]";
}

RandomizedPolicy RandomizedPolicy::one_hot(const DeterministicPolicy& policy, int num_actions) {
  Matrix theta = Matrix::Zero(policy.size(), num_actions);
  for (int i = 0; i < policy.size(); ++i) theta(i, policy[i]) = 1.0;
  return RandomizedPolicy(std::move(theta));
}

RandomizedPolicy RandomizedPolicy::uniform(const MdpModel& model) {
  Matrix theta = Matrix::Zero(model.num_states(), model.num_actions());
  for (int i = 0; i < model.num_states(); ++i) {
    const auto& actions = model.feasible(i);
    for (int a : actions) theta(i, a) = 1.0 / static_cast<double>(actions.size());
  }
  return RandomizedPolicy(std::move(theta));
}

Vector InducedChain::squared_deviation(double center) const {
  Vector out(num_states());
  for (int i = 0; i < num_states(); ++i) {
    double acc = 0.0;
    for (const auto& c : components[i]) acc += c.weight * (c.reward - center) * (c.reward - center);
    out(i) = acc;
  }
  return out;
}

Vector InducedChain::mean_variance_cost(double center, double beta) const {
  Vector out(num_states());
  for (int i = 0; i < num_states(); ++i) {
    double acc = 0.0;
    for (const auto& c : components[i])
      acc += c.weight * (c.reward - beta * (c.reward - center) * (c.reward - center));
    out(i) = acc;
  }
  return out;
}

void validate(const MdpModel& model, const DeterministicPolicy& policy) {
  if (policy.size() != model.num_states())
    throw ValidationError("policy has " + std::to_string(policy.size()) + " states, model has " +
                          std::to_string(model.num_states()));
  for (int i = 0; i < policy.size(); ++i)
    if (!model.is_feasible(i, policy[i]))
      throw FeasibilityError(i, policy[i],
                             "policy action " + std::to_string(policy[i]) +
                                 " is not feasible at state " + std::to_string(i));
}

void validate(const MdpModel& model, const RandomizedPolicy& policy) {
  const Matrix& theta = policy.theta();
  if (theta.rows() != model.num_states() || theta.cols() != model.num_actions())
    throw ValidationError("randomized policy has shape " + std::to_string(theta.rows()) + "x" +
                          std::to_string(theta.cols()) + ", model is " +
                          std::to_string(model.num_states()) + "x" +
                          std::to_string(model.num_actions()));
  for (int i = 0; i < model.num_states(); ++i) {
    double sum = 0.0;
    for (int a = 0; a < model.num_actions(); ++a) {
      const double w = theta(i, a);
      if (!(w >= 0.0) || !std::isfinite(w))
        throw ValidationError("randomized policy row " + std::to_string(i) +
                              " has invalid entry at action " + std::to_string(a));
      if (w > 0.0 && !model.is_feasible(i, a))
        throw FeasibilityError(i, a,
                               "randomized policy puts mass on infeasible action " +
                                   std::to_string(a) + " at state " + std::to_string(i));
      sum += w;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
      throw ValidationError("randomized policy row " + std::to_string(i) + " does not sum to 1");
  }
}

void validate(const MdpModel& model, const MixedPolicy& policy) {
  if (!(policy.delta >= 0.0 && policy.delta <= 1.0))
    throw ValidationError("mixing probability delta must lie in [0, 1]");
  validate(model, policy.base);
  validate(model, policy.alt);
}

InducedChain induced_chain(const MdpModel& model, const DeterministicPolicy& policy) {
  validate(model, policy);
  const int n = model.num_states();
  InducedChain chain{Matrix(n, n), Vector(n), Vector(n), {}};
  chain.components.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto row = model.transition(i, policy[i]);
    for (int j = 0; j < n; ++j) chain.transition(i, j) = row[j];
    const double r = model.reward(i, policy[i]);
    chain.reward(i) = r;
    chain.reward_second_moment(i) = r * r;
    chain.components[i] = {{1.0, r}};
  }
  return chain;
}

InducedChain induced_chain(const MdpModel& model, const RandomizedPolicy& policy) {
  validate(model, policy);
  const int n = model.num_states();
  InducedChain chain{Matrix::Zero(n, n), Vector::Zero(n), Vector::Zero(n), {}};
  chain.components.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int a : model.feasible(i)) {
      const double w = policy(i, a);
      if (w == 0.0) continue;
      const auto row = model.transition(i, a);
      for (int j = 0; j < n; ++j) chain.transition(i, j) += w * row[j];
      const double r = model.reward(i, a);
      chain.reward(i) += w * r;
      chain.reward_second_moment(i) += w * r * r;
      chain.components[i].push_back({w, r});
    }
  }
  return chain;
}

InducedChain induced_chain(const MdpModel& model, const MixedPolicy& policy) {
  validate(model, policy);
  const double d = policy.delta;
  const InducedChain base = induced_chain(model, policy.base);
  const InducedChain alt = induced_chain(model, policy.alt);
  // (1-d) x + d y keeps both endpoints bit-exact.
  InducedChain chain{(1.0 - d) * base.transition + d * alt.transition,
                     (1.0 - d) * base.reward + d * alt.reward,
                     (1.0 - d) * base.reward_second_moment + d * alt.reward_second_moment,
                     {}};
  chain.components.resize(model.num_states());
  for (int i = 0; i < model.num_states(); ++i) {
    if (d < 1.0) chain.components[i].push_back({1.0 - d, base.reward(i)});
    if (d > 0.0) chain.components[i].push_back({d, alt.reward(i)});
  }
  return chain;
}

bool is_irreducible(const Matrix& transition) {
  if (transition.rows() != transition.cols() || transition.rows() == 0) return false;
  const auto forward = reachable(transition, false);
  const auto backward = reachable(transition, true);
  for (std::size_t i = 0; i < forward.size(); ++i)
    if (!forward[i] || !backward[i]) return false;
  return true;
}

bool is_unichain(const Matrix& transition) {
  if (transition.rows() != transition.cols() || transition.rows() == 0) return false;
  const auto n = transition.rows();
  // Walk down to a recurrent state: while some s reachable from r cannot
  // reach r, move to s; the forward set shrinks strictly each time.
  Eigen::Index r = 0;
  for (Eigen::Index step = 0; step <= n; ++step) {
    const auto forward = reachable(transition, false, r);
    const auto backward = reachable(transition, true, r);
    Eigen::Index escape = -1;
    for (Eigen::Index s = 0; s < n && escape < 0; ++s)
      if (forward[s] && !backward[s]) escape = s;
    if (escape < 0)
      return std::all_of(backward.begin(), backward.end(), [](char c) { return c != 0; });
    r = escape;
  }
  return false;
}

DeterministicPolicy random_policy(const MdpModel& model, std::mt19937_64& rng) {
  std::vector<int> actions(model.num_states());
  for (int i = 0; i < model.num_states(); ++i) {
    const auto& feasible = model.feasible(i);
    std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
    actions[i] = feasible[pick(rng)];
  }
  return DeterministicPolicy(std::move(actions));
}

ErgodicityReport check_ergodicity(const MdpModel& model, const ErgodicityOptions& options) {
  ErgodicityReport report;
  const int n = model.num_states();

  Matrix support = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int a : model.feasible(i)) {
      const auto row = model.transition(i, a);
      for (int j = 0; j < n; ++j) support(i, j) += row[j];
    }
  report.union_irreducible = is_irreducible(support);

  auto check = [&](const DeterministicPolicy& policy) {
    ++report.policies_checked;
    const Matrix p = induced_chain(model, policy).transition;
    if (!is_unichain(p)) ++report.multichain_count;
    if (!is_irreducible(p)) {
      ++report.violation_count;
      if (report.violations.size() < options.max_reported) report.violations.push_back(policy);
    }
  };

  if (model.policy_count() <= options.enumeration_cap) {
    report.mode = ErgodicityCheckMode::exhaustive;
    std::vector<std::size_t> digits(n, 0);
    std::vector<int> actions(n);
    while (true) {
      for (int i = 0; i < n; ++i) actions[i] = model.feasible(i)[digits[i]];
      check(DeterministicPolicy(actions));
      int pos = 0;
      while (pos < n && ++digits[pos] == model.feasible(pos).size()) digits[pos++] = 0;
      if (pos == n) break;
    }
  } else {
    report.mode = ErgodicityCheckMode::sampled;
    std::mt19937_64 rng(options.seed);
    for (std::uint64_t k = 0; k < options.samples; ++k) check(random_policy(model, rng));
  }
  return report;
}

const char* to_string(ErgodicityCheckMode mode) noexcept {
  return mode == ErgodicityCheckMode::exhaustive ? "exhaustive" : "sampled";
}

}  // namespace mvmdp
