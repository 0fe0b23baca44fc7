#include <gtest/gtest.h>

#include <array>
#include <set>

#include "mvmdp/error.hpp"
#include "mvmdp/sensitivity.hpp"
#include "mvmdp/solvers.hpp"
#include "test_support.hpp"

using namespace mvmdp;
namespace ts = testing_support;

namespace {

// Two-state hand model (g = [0, -1] under action 0) plus a jump-home action at state 1.
MdpModel hand_model() {
  MdpModel::Builder b(2, 2, 1.0);
  b.add_action(0, 0, {0.5, 0.5}, 1.0);
  b.add_action(1, 0, {0.5, 0.5}, 0.0).add_action(1, 1, {1.0, 0.0}, 2.0);
  return b.build();
}

}  // namespace

TEST(StateActionTable, DefinedEntriesAndTies) {
  StateActionTable t(2, 3);
  t.set(0, 0, 1.0);
  t.set(0, 2, 1.0);
  t.set(1, 1, -4.0);
  EXPECT_TRUE(t.defined(0, 2));
  EXPECT_FALSE(t.defined(0, 1));
  EXPECT_FALSE(t.defined(5, 0));
  EXPECT_THROW(t.at(0, 1), ValidationError);
  EXPECT_EQ(t.argmax(0), (std::pair<int, double>{0, 1.0}));
  EXPECT_EQ(t.argmax(1).first, 1);
  EXPECT_THROW(t.set(2, 0, 0.0), ValidationError);
}

TEST(Scores, HandModel) {
  const MdpModel m = hand_model();
  const DeterministicPolicy d({0, 0});
  const EvaluationReport r = evaluate(m, d);
  const ImprovementVector v = improvement_vector(m, r, d);
  EXPECT_NEAR(v.score.at(0, 0), 0.25, 1e-14);   // 1 - 1/4 - 1/2
  EXPECT_NEAR(v.score.at(1, 0), -0.75, 1e-14);  // 0 - 1/4 - 1/2
  EXPECT_NEAR(v.score.at(1, 1), -0.25, 1e-14);  // 2 - 9/4 + 0
  EXPECT_EQ(v.current_score(1), v.score.at(1, 0));
  EXPECT_FALSE(v.score.defined(0, 1));
}

TEST(Scores, SingleActionColumnIsCostPlusExpectedPotential) {
  std::mt19937_64 rng(8);
  const MdpModel m = ts::random_model(rng, 4, 1, 0.4);
  const DeterministicPolicy d(std::vector<int>(4, 0));
  const EvaluationReport r = evaluate(m, d);
  const ImprovementVector v = improvement_vector(m, r, d);
  const Vector pg = induced_chain(m, d).transition * r.potential;
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(v.score.at(i, 0), r.cost(i) + pg(i), 1e-12);
  EXPECT_TRUE(check_necessary_condition(m, r, d).empty());
}

TEST(Scores, DuplicateActionsGiveIdenticalColumns) {
  MdpModel::Builder b(2, 2, 0.3);
  b.add_action(0, 0, {0.2, 0.8}, 1.0).add_action(0, 1, {0.2, 0.8}, 1.0);
  b.add_action(1, 0, {0.6, 0.4}, 3.0).add_action(1, 1, {0.6, 0.4}, 3.0);
  const MdpModel m = b.build();
  const DeterministicPolicy d({0, 1});
  const EvaluationReport r = evaluate(m, d);
  const ImprovementVector v = improvement_vector(m, r, d);
  const StateActionTable g = derivative_randomized(m, RandomizedPolicy::uniform(m),
                                                   evaluate(m, RandomizedPolicy::uniform(m)));
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(v.score.at(i, 0), v.score.at(i, 1));
    EXPECT_EQ(g.at(i, 0), g.at(i, 1));
  }
}

TEST(Scores, ForeignReportIsRejected) {
  std::mt19937_64 rng(4);
  const MdpModel m = ts::random_model(rng, 4, 3, 0.5, false);
  const DeterministicPolicy d({0, 0, 0, 0}), e({1, 1, 1, 1});
  EXPECT_THROW(improvement_vector(m, evaluate(m, e), d), ValidationError);
  EXPECT_THROW(improvement_vector(m.with_beta(0.9), evaluate(m, d), d), ValidationError);
}

TEST(Difference, IdenticalPoliciesGiveZero) {
  std::mt19937_64 rng(12);
  const MdpModel m = ts::random_model(rng, 5, 3, 0.5);
  const DeterministicPolicy d = random_policy(m, rng);
  const DifferenceBreakdown b = predicted_difference(m, d, evaluate(m, d), d);
  EXPECT_NEAR(b.linear_part, 0.0, 1e-15);
  EXPECT_EQ(b.square_part, 0.0);
  EXPECT_NEAR(b.total, 0.0, 1e-15);
  EXPECT_EQ(b.direct, 0.0);
}

TEST(Difference, MatchesDoubleEvaluation) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const MdpModel m = ts::random_model(rng, 4, 3, std::array{0.1, 0.5, 1.0}[trial % 3]);
    const DeterministicPolicy d = random_policy(m, rng);
    const DeterministicPolicy e = random_policy(m, rng);
    const DifferenceBreakdown b = predicted_difference(m, d, evaluate(m, d), e);
    const double oracle = ts::oracle_metrics(m, e).j_combined - ts::oracle_metrics(m, d).j_combined;
    EXPECT_NEAR(b.total, b.direct, 1e-10);
    EXPECT_NEAR(b.direct, oracle, 1e-9);
    EXPECT_GE(b.square_part, 0.0);
  }
}

TEST(NecessaryCondition, ListsExactlyTheStatesOfTheNextStep) {
  std::mt19937_64 rng(77);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const MdpModel m = ts::random_model(rng, 6, 4, 0.5);
    const PolicyIterationResult run = policy_iteration(m, random_policy(m, rng));
    const auto& it = run.trace.iterations;
    ASSERT_TRUE(run.trace.converged);
    EXPECT_TRUE(check_necessary_condition(m, run.report, run.policy).empty());
    if (it.size() < 3) continue;
    const DeterministicPolicy& before = it[it.size() - 3].policy;
    const DeterministicPolicy& after = it[it.size() - 2].policy;
    std::set<int> violating, changed;
    for (const auto& v : check_necessary_condition(m, evaluate(m, before), before)) {
      violating.insert(v.state);
      EXPECT_GT(v.margin, kImprovementMargin);
    }
    for (int i = 0; i < m.num_states(); ++i)
      if (before[i] != after[i]) changed.insert(i);
    EXPECT_EQ(violating, changed);
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(MixedDerivative, ZeroTowardItself) {
  std::mt19937_64 rng(3);
  const MdpModel m = ts::random_model(rng, 4, 2, 0.2);
  const DeterministicPolicy d = random_policy(m, rng);
  EXPECT_NEAR(derivative_mixed(m, d, evaluate(m, d), d), 0.0, 1e-15);
}

TEST(MixedDerivative, MatchesCentralDifference) {
  std::mt19937_64 rng(501);
  for (int trial = 0; trial < 50; ++trial) {
    const MdpModel m = ts::random_model(rng, 3 + trial % 3, 3, std::array{0.1, 0.5, 1.0}[trial % 3]);
    const DeterministicPolicy d = random_policy(m, rng);
    const DeterministicPolicy e = random_policy(m, rng);
    const double analytic = derivative_mixed(m, d, evaluate(m, d), e);
    const double numeric = ts::central_difference(
        [&](double h) { return evaluate_chain(ts::linear_mixture(m, d, e, h), m.beta()).j_combined; });
    EXPECT_TRUE(ts::rel_close(analytic, numeric, 1e-4)) << analytic << " vs " << numeric;
  }
}

TEST(RandomizedDerivative, DirectionalMatchesCentralDifference) {
  std::mt19937_64 rng(502);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const MdpModel m = ts::random_model(rng, 3, 3, std::array{0.1, 0.5, 1.0}[trial % 3]);
    const RandomizedPolicy theta = ts::interior_theta(m, rng);
    const StateActionTable grad = derivative_randomized(m, theta, evaluate(m, theta));
    for (int i = 0; i < m.num_states(); ++i) {
      const auto& f = m.feasible(i);
      if (f.size() < 2) continue;
      const int a = f[0], b = f[1];
      const double analytic = grad.at(i, a) - grad.at(i, b);
      const double numeric = ts::central_difference([&](double h) {
        Matrix t = theta.theta();
        t(i, a) += h;
        t(i, b) -= h;
        return evaluate(m, RandomizedPolicy(t)).j_combined;
      });
      EXPECT_TRUE(ts::rel_close(analytic, numeric, 1e-4)) << analytic << " vs " << numeric;
      ++checked;
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(Derivatives, FixedPointIsStationaryInBothPolicySpaces) {
  std::mt19937_64 rng(610);
  for (int trial = 0; trial < 20; ++trial) {
    const MdpModel m = ts::random_model(rng, 5, 3, 0.5);
    const PolicyIterationResult run = policy_iteration(m, random_policy(m, rng));
    const DeterministicPolicy& d = run.policy;
    for (int k = 0; k < 20; ++k)
      EXPECT_LE(derivative_mixed(m, d, run.report, random_policy(m, rng)), 1e-9);
    const RandomizedPolicy hot = RandomizedPolicy::one_hot(d, m.num_actions());
    const StateActionTable grad = derivative_randomized(m, hot, evaluate(m, hot));
    for (int i = 0; i < m.num_states(); ++i)
      EXPECT_GE(grad.at(i, d[i]), grad.argmax(i).second - 1e-9);
  }
}

TEST(Invariance, PotentialShiftLeavesDecisionsUnchanged) {
  std::mt19937_64 rng(900);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  for (int trial = 0; trial < 30; ++trial) {
    const MdpModel m = ts::random_model(rng, 5, 3, 0.5);
    const DeterministicPolicy d = random_policy(m, rng);
    const DeterministicPolicy e = random_policy(m, rng);
    const double c = shift(rng);
    const EvaluationReport r = evaluate(m, d);
    EvaluationReport shifted = r;
    shifted.potential.array() += c;

    const StateActionTable base = improvement_scores(m, r.j_mean, r.potential);
    const StateActionTable moved = improvement_scores(m, r.j_mean, shifted.potential);
    for (int i = 0; i < m.num_states(); ++i) {
      EXPECT_EQ(base.argmax(i).first, moved.argmax(i).first);
      for (int a : m.feasible(i)) EXPECT_NEAR(moved.at(i, a) - base.at(i, a), c, 1e-12);
    }
    EXPECT_NEAR(derivative_mixed(m, d, r, e), derivative_mixed(m, d, shifted, e), 1e-11);

    const RandomizedPolicy theta = ts::interior_theta(m, rng);
    const EvaluationReport rt = evaluate(m, theta);
    EvaluationReport st = rt;
    st.potential.array() += c;
    const StateActionTable g0 = derivative_randomized(m, theta, rt);
    const StateActionTable g1 = derivative_randomized(m, theta, st);
    for (int i = 0; i < m.num_states(); ++i) {
      EXPECT_EQ(g0.argmax(i).first, g1.argmax(i).first);
      for (int a : m.feasible(i)) EXPECT_NEAR(g1.at(i, a) - g0.at(i, a), rt.pi(i) * c, 1e-11);
    }
  }
}
