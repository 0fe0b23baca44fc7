#include "mvmdp/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "mvmdp/error.hpp"
#include "solver_common.hpp"

namespace mvmdp {

namespace {

// Inverse-CDF sampler over a finite distribution given by its cumulative sums.
struct Categorical {
  std::vector<double> cumulative;
  std::vector<int> outcome;

  void add(int value, double weight) {
    if (weight <= 0.0) return;
    cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + weight);
    outcome.push_back(value);
  }

  int sample(double u) const {
    const double target = u * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    const auto k = std::min<std::size_t>(it - cumulative.begin(), outcome.size() - 1);
    return outcome[k];
  }
};

class PathSampler {
 public:
  PathSampler(const MdpModel& model, const AnyPolicy& policy) : model_(model) {
    const int n = model.num_states();
    policy_.resize(n);
    if (const auto* d = std::get_if<DeterministicPolicy>(&policy)) {
      validate(model, *d);
      for (int i = 0; i < n; ++i) policy_[i].add((*d)[i], 1.0);
    } else {
      const auto& theta = std::get<RandomizedPolicy>(policy);
      validate(model, theta);
      for (int i = 0; i < n; ++i)
        for (int a : model.feasible(i)) policy_[i].add(a, theta(i, a));
    }
    next_.resize(static_cast<std::size_t>(n) * model.num_actions());
    for (int i = 0; i < n; ++i)
      for (int a : model.feasible(i)) {
        const auto row = model.transition(i, a);
        auto& dist = next_[static_cast<std::size_t>(i) * model.num_actions() + a];
        for (int j = 0; j < n; ++j) dist.add(j, row[j]);
      }
  }

  template <class Rng, class Visit>
  int run(Rng& rng, int state, std::uint64_t steps, Visit&& visit) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::uint64_t t = 0; t < steps; ++t) {
      const int action = policy_[state].sample(unit(rng));
      visit(state, action, model_.reward(state, action));
      state = next_[static_cast<std::size_t>(state) * model_.num_actions() + action].sample(unit(rng));
    }
    return state;
  }

 private:
  const MdpModel& model_;
  std::vector<Categorical> policy_;
  std::vector<Categorical> next_;
};

double student_quantile(int dof) {
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.975);
}

double half_width(const std::vector<double>& batch_values) {
  const auto n = static_cast<double>(batch_values.size());
  double mean = 0.0;
  for (double v : batch_values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : batch_values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return student_quantile(static_cast<int>(batch_values.size()) - 1) * sd / std::sqrt(n);
}

}  // namespace

SamplePath simulate_path(const MdpModel& model, const AnyPolicy& policy, std::uint64_t horizon,
                         std::uint64_t seed, int start_state, const SimulationOptions& options) {
  if (horizon < 1) throw ValidationError("simulation horizon must be at least 1");
  if (start_state < 0 || start_state >= model.num_states())
    throw ValidationError("start state " + std::to_string(start_state) + " out of range");
  const PathSampler sampler(model, policy);
  auto rng = detail::seeded_rng(seed, 0);

  const int start = sampler.run(rng, start_state, options.burn_in, [](int, int, double) {});
  SamplePath path;
  path.states.reserve(horizon);
  path.actions.reserve(horizon);
  path.rewards.reserve(horizon);
  sampler.run(rng, start, horizon, [&](int s, int a, double r) {
    path.states.push_back(s);
    path.actions.push_back(a);
    path.rewards.push_back(r);
  });
  return path;
}

SimulationEstimate estimate_metrics(const SamplePath& path, double beta, int batches) {
  const std::size_t n = path.size();
  if (n < 2) throw ValidationError("metric estimation needs a path of length at least 2");
  if (batches < 2) throw ValidationError("batch means need at least 2 batches");

  SimulationEstimate est;
  est.horizon = n;
  double sum = 0.0;
  for (double r : path.rewards) sum += r;
  est.j_mean_hat = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double r : path.rewards) ss += (r - est.j_mean_hat) * (r - est.j_mean_hat);
  est.j_var_hat = ss / static_cast<double>(n);
  est.j_combined_hat = est.j_mean_hat - beta * est.j_var_hat;

  const auto nb = std::min<std::size_t>(static_cast<std::size_t>(batches), n);
  const std::size_t size = n / nb;
  std::vector<double> means, vars, combined;
  for (std::size_t b = 0; b < nb; ++b) {
    double m = 0.0, v = 0.0;
    for (std::size_t t = b * size; t < (b + 1) * size; ++t) {
      const double r = path.rewards[t];
      m += r;
      v += (r - est.j_mean_hat) * (r - est.j_mean_hat);
    }
    m /= static_cast<double>(size);
    v /= static_cast<double>(size);
    means.push_back(m);
    vars.push_back(v);
    combined.push_back(m - beta * v);
  }
  est.batches = static_cast<int>(nb);
  est.mean_half_width = half_width(means);
  est.var_half_width = half_width(vars);
  est.combined_half_width = half_width(combined);
  return est;
}

PotentialEstimate estimate_potential(const MdpModel& model, const AnyPolicy& policy,
                                     const Vector& cost, double gain, int state, int truncation,
                                     int replications, std::uint64_t seed) {
  if (state < 0 || state >= model.num_states())
    throw ValidationError("state " + std::to_string(state) + " out of range");
  if (cost.size() != model.num_states()) throw ValidationError("cost vector has the wrong length");
  if (truncation < 1) throw ValidationError("truncation must be at least 1");
  if (replications < 2) throw ValidationError("potential estimation needs at least 2 replications");
  if (state == 0) return {0.0, 0.0};

  const PathSampler sampler(model, policy);
  auto accumulate = [&](int start) {
    double sum = 0.0, sum_sq = 0.0;
    for (int rep = 0; rep < replications; ++rep) {
      auto rng = detail::seeded_rng(seed, (static_cast<std::uint64_t>(start) << 32) | rep);
      double total = 0.0;
      sampler.run(rng, start, static_cast<std::uint64_t>(truncation) + 1,
                  [&](int s, int, double) { total += cost(s) - gain; });
      sum += total;
      sum_sq += total * total;
    }
    const double n = replications;
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return std::pair{mean, var / n};
  };
  const auto [at_state, var_state] = accumulate(state);
  const auto [at_zero, var_zero] = accumulate(0);
  return {at_state - at_zero, std::sqrt(var_state + var_zero)};
}

}  // namespace mvmdp
