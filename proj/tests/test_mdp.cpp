#include <gtest/gtest.h>

#include "mvmdp/error.hpp"
#include "mvmdp/mdp.hpp"
#include "test_support.hpp"

using namespace mvmdp;

namespace {

// Two states, action 0 stays, action 1 swaps.
MdpModel stay_swap(double beta = 0.1) {
  MdpModel::Builder b(2, 2, beta);
  b.add_action(0, 0, {1, 0}, 1.0).add_action(0, 1, {0, 1}, 2.0);
  b.add_action(1, 0, {0, 1}, 3.0).add_action(1, 1, {1, 0}, 4.0);
  return b.build();
}

}  // namespace

TEST(MdpModel, SingleStateChain) {
  MdpModel::Builder b(1, 1, 0.1);
  b.add_action(0, 0, {1.0}, 3.0);
  const MdpModel m = b.build();
  const InducedChain c = induced_chain(m, DeterministicPolicy({0}));
  EXPECT_EQ(c.transition(0, 0), 1.0);
  EXPECT_EQ(c.reward(0), 3.0);
  EXPECT_EQ(m.policy_count(), 1u);
}

TEST(MdpModel, PolicyLookupBuildsChain) {
  const MdpModel m = stay_swap();
  const InducedChain c = induced_chain(m, DeterministicPolicy({1, 0}));
  EXPECT_EQ(c.transition(0, 0), 0.0);
  EXPECT_EQ(c.transition(0, 1), 1.0);
  EXPECT_EQ(c.transition(1, 0), 0.0);
  EXPECT_EQ(c.transition(1, 1), 1.0);
  EXPECT_EQ(c.reward(0), 2.0);
  EXPECT_EQ(c.reward(1), 3.0);
}

TEST(MdpModel, IdenticalActionsGiveIdenticalChains) {
  MdpModel::Builder b(2, 2, 0.5);
  for (int i = 0; i < 2; ++i)
    for (int a = 0; a < 2; ++a) b.add_action(i, a, {0.3, 0.7}, 1.5 + i);
  const MdpModel m = b.build();
  const InducedChain x = induced_chain(m, DeterministicPolicy({0, 1}));
  const InducedChain y = induced_chain(m, DeterministicPolicy({1, 0}));
  EXPECT_EQ(x.transition, y.transition);
  EXPECT_EQ(x.reward, y.reward);
}

TEST(MdpModel, RowSumErrorNamesTheRow) {
  MdpModel::Builder b(2, 2, 0.1);
  b.add_action(0, 0, {0.5, 0.5}, 0.0).add_action(1, 0, {0.5, 0.5}, 0.0);
  try {
    b.add_action(1, 1, {0.5, 0.4}, 0.0);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("1,1"), std::string::npos) << e.what();
  }
}

TEST(MdpModel, RejectsMalformedInput) {
  EXPECT_THROW(MdpModel::Builder(0, 1, 0.1), ValidationError);
  EXPECT_THROW(MdpModel::Builder(1, 0, 0.1), ValidationError);
  {
    MdpModel::Builder b(2, 1, 0.1);
    EXPECT_THROW(b.add_action(0, 0, {1.0}, 0.0), ValidationError);            // wrong length
    EXPECT_THROW(b.add_action(0, 0, {1.5, -0.5}, 0.0), ValidationError);      // negative
    EXPECT_THROW(b.add_action(0, 1, {1.0, 0.0}, 0.0), ValidationError);       // action range
    EXPECT_THROW(b.add_action(2, 0, {1.0, 0.0}, 0.0), ValidationError);       // state range
    EXPECT_THROW(b.add_action(0, 0, {1.0, 0.0}, NAN), ValidationError);       // reward
    b.add_action(0, 0, {1.0, 0.0}, 0.0);
    EXPECT_THROW(b.add_action(0, 0, {1.0, 0.0}, 0.0), ValidationError);       // duplicate
    EXPECT_THROW(b.build(), ValidationError);                                 // state 1 empty
  }
  for (double beta : {0.0, -1.0}) {
    MdpModel::Builder b(1, 1, beta);
    b.add_action(0, 0, {1.0}, 0.0);
    EXPECT_THROW(b.build(), ValidationError);
  }
}

TEST(MdpModel, FeasibleSetsAreAscendingAndChecked) {
  MdpModel::Builder b(1, 3, 0.1);
  b.add_action(0, 2, {1.0}, 0.0).add_action(0, 0, {1.0}, 1.0);
  const MdpModel m = b.build();
  EXPECT_EQ(m.feasible(0), (std::vector<int>{0, 2}));
  EXPECT_TRUE(m.is_feasible(0, 2));
  EXPECT_FALSE(m.is_feasible(0, 1));
  EXPECT_THROW(m.transition(0, 1), FeasibilityError);
  EXPECT_THROW(m.reward(0, 1), FeasibilityError);
  EXPECT_EQ(m.policy_count(), 2u);
}

TEST(MdpModel, WithBetaKeepsDynamics) {
  const MdpModel m = stay_swap(0.1);
  const MdpModel n = m.with_beta(2.0);
  EXPECT_EQ(n.beta(), 2.0);
  EXPECT_EQ(n.reward(1, 1), m.reward(1, 1));
  EXPECT_FALSE(m == n);
  EXPECT_TRUE(m == n.with_beta(0.1));
  EXPECT_THROW(m.with_beta(0.0), ValidationError);
}

TEST(MdpModel, PolicyCountSaturates) {
  MdpModel::Builder b(70, 2, 0.1);
  std::vector<double> row(70, 1.0 / 70);
  for (int i = 0; i < 70; ++i) b.add_action(i, 0, row, 0.0).add_action(i, 1, row, 0.0);
  EXPECT_EQ(b.build().policy_count(), UINT64_MAX);
}

TEST(Policies, InfeasibleActionIsReported) {
  MdpModel::Builder b(2, 2, 0.1);
  b.add_action(0, 0, {0.5, 0.5}, 0.0).add_action(1, 0, {0.5, 0.5}, 0.0);
  b.add_action(1, 1, {0.5, 0.5}, 0.0);
  const MdpModel m = b.build();
  try {
    validate(m, DeterministicPolicy({1, 0}));
    FAIL() << "expected FeasibilityError";
  } catch (const FeasibilityError& e) {
    EXPECT_EQ(e.state(), 0);
    EXPECT_EQ(e.action(), 1);
  }
  EXPECT_THROW(validate(m, DeterministicPolicy({0})), ValidationError);

  Matrix theta(2, 2);
  theta << 0.5, 0.5, 0.5, 0.5;
  EXPECT_THROW(validate(m, RandomizedPolicy(theta)), FeasibilityError);
  theta << 1.0, 0.0, 0.5, 0.4;
  EXPECT_THROW(validate(m, RandomizedPolicy(theta)), ValidationError);
  theta << 1.0, 0.0, 1.2, -0.2;
  EXPECT_THROW(validate(m, RandomizedPolicy(theta)), ValidationError);
  EXPECT_THROW(validate(m, MixedPolicy{DeterministicPolicy({0, 0}), DeterministicPolicy({0, 1}), 1.5}),
               ValidationError);
}

TEST(Policies, OneHotThetaMatchesDeterministicChain) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const MdpModel m = testing_support::random_model(rng, 4, 3, 0.3);
    const DeterministicPolicy d = random_policy(m, rng);
    const InducedChain a = induced_chain(m, d);
    const InducedChain b = induced_chain(m, RandomizedPolicy::one_hot(d, m.num_actions()));
    EXPECT_EQ(a.transition, b.transition);
    EXPECT_EQ(a.reward, b.reward);
    EXPECT_EQ(a.reward_second_moment, b.reward_second_moment);
  }
}

TEST(Policies, UniformMixtureMoments) {
  MdpModel::Builder b(1, 2, 0.1);
  b.add_action(0, 0, {1.0}, 0.0).add_action(0, 1, {1.0}, 2.0);
  const MdpModel m = b.build();
  const InducedChain c = induced_chain(m, RandomizedPolicy::uniform(m));
  EXPECT_DOUBLE_EQ(c.reward(0), 1.0);
  EXPECT_DOUBLE_EQ(c.reward_second_moment(0), 2.0);
  // Per-action squared deviation keeps the within-state spread.
  EXPECT_DOUBLE_EQ(c.squared_deviation(1.0)(0), 1.0);
  EXPECT_DOUBLE_EQ(c.mean_variance_cost(1.0, 0.5)(0), 0.5);
}

TEST(Policies, RandomizedRowsStayStochastic) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const MdpModel m = testing_support::random_model(rng, 3, 3, 0.2);
    Matrix theta = Matrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i) {
      const auto w = testing_support::random_row(rng, static_cast<int>(m.feasible(i).size()));
      for (std::size_t k = 0; k < w.size(); ++k) theta(i, m.feasible(i)[k]) = w[k];
    }
    const InducedChain c = induced_chain(m, RandomizedPolicy(theta));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(c.transition.row(i).sum(), 1.0, 1e-12);
  }
}

TEST(Policies, MixedEndpointsAreBitExact) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const MdpModel m = testing_support::random_model(rng, 5, 3, 0.5);
    const DeterministicPolicy d = random_policy(m, rng);
    const DeterministicPolicy e = random_policy(m, rng);
    const InducedChain cd = induced_chain(m, d);
    const InducedChain ce = induced_chain(m, e);
    const InducedChain m0 = induced_chain(m, MixedPolicy{d, e, 0.0});
    const InducedChain m1 = induced_chain(m, MixedPolicy{d, e, 1.0});
    EXPECT_EQ(m0.transition, cd.transition);
    EXPECT_EQ(m0.reward, cd.reward);
    EXPECT_EQ(m1.transition, ce.transition);
    EXPECT_EQ(m1.reward, ce.reward);
  }
}

TEST(Policies, MixedMidpoint) {
  const MdpModel m = stay_swap();
  const InducedChain c =
      induced_chain(m, MixedPolicy{DeterministicPolicy({0, 0}), DeterministicPolicy({1, 1}), 0.5});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_EQ(c.transition(i, j), 0.5);
}

TEST(Structure, IrreducibleVersusUnichain) {
  Matrix p(2, 2);
  p << 1, 0, 0, 1;
  EXPECT_FALSE(is_irreducible(p));
  EXPECT_FALSE(is_unichain(p));
  p << 0.5, 0.5, 0, 1;
  EXPECT_FALSE(is_irreducible(p));
  EXPECT_TRUE(is_unichain(p));
  p << 0, 1, 1, 0;
  EXPECT_TRUE(is_irreducible(p));
  EXPECT_TRUE(is_unichain(p));
  Matrix q(4, 4);  // transient 0 and 1 feeding two closed classes
  q << 0, 0.5, 0.5, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_FALSE(is_unichain(q));
  q << 0, 0.5, 0.5, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0;
  EXPECT_TRUE(is_unichain(q));
}

TEST(Ergodicity, SingleStateIsIrreducible) {
  MdpModel::Builder b(1, 1, 0.1);
  b.add_action(0, 0, {1.0}, 0.0);
  const ErgodicityReport r = check_ergodicity(b.build());
  EXPECT_EQ(r.mode, ErgodicityCheckMode::exhaustive);
  EXPECT_EQ(r.policies_checked, 1u);
  EXPECT_TRUE(r.ok());
}

TEST(Ergodicity, AbsorbingActionIsNamed) {
  MdpModel::Builder b(2, 2, 0.1);
  b.add_action(0, 0, {0.5, 0.5}, 0.0);
  b.add_action(1, 0, {0.5, 0.5}, 0.0).add_action(1, 1, {0.0, 1.0}, 0.0);
  const ErgodicityReport r = check_ergodicity(b.build());
  EXPECT_EQ(r.mode, ErgodicityCheckMode::exhaustive);
  EXPECT_EQ(r.policies_checked, 2u);
  EXPECT_TRUE(r.union_irreducible);
  ASSERT_EQ(r.violation_count, 1u);
  EXPECT_EQ(r.violations.at(0), DeterministicPolicy({0, 1}));
  EXPECT_EQ(r.multichain_count, 0u);  // state 0 is transient, one closed class
  EXPECT_FALSE(r.ok());
}

TEST(Ergodicity, SamplesWhenEnumerationIsTooLarge) {
  std::mt19937_64 rng(3);
  const MdpModel m = testing_support::random_model(rng, 30, 3, 0.1, false);
  ErgodicityOptions opt;
  opt.samples = 50;
  const ErgodicityReport r = check_ergodicity(m, opt);
  EXPECT_EQ(r.mode, ErgodicityCheckMode::sampled);
  EXPECT_EQ(r.policies_checked, 50u);
  EXPECT_TRUE(r.ok());
}

TEST(Policies, RandomPolicyIsSeedDeterministic) {
  std::mt19937_64 rng(1);
  const MdpModel m = testing_support::random_model(rng, 6, 4, 0.1);
  std::mt19937_64 a(42), b(42);
  for (int k = 0; k < 10; ++k) {
    const DeterministicPolicy x = random_policy(m, a);
    EXPECT_EQ(x, random_policy(m, b));
    EXPECT_NO_THROW(validate(m, x));
  }
}
