#include <gtest/gtest.h>

#include <sstream>

#include "atpo/core/mmdp.hpp"
#include "atpo/core/model_io.hpp"
#include "atpo/core/pomdp.hpp"
#include "oracles/oracles.hpp"

using namespace atpo;

namespace {

TabularPomdp two_state_identity_obs() {
  PomdpBuilder b(2, 1, 2);
  b.add_transition(0, 0, 0, 0.3);
  b.add_transition(0, 0, 1, 0.7);
  b.add_transition(0, 1, 1, 1.0);
  b.add_observation(0, 0, 0, 1.0);
  b.add_observation(0, 1, 1, 1.0);
  return std::move(b).build();
}

TabularPomdp two_state_uniform() {
  PomdpBuilder b(2, 1, 2);
  for (Index x = 0; x < 2; ++x)
    for (Index y = 0; y < 2; ++y) {
      b.add_transition(0, x, y, 0.5);
      b.add_observation(0, y, x, 0.5);
    }
  return std::move(b).build();
}

}  // namespace

TEST(BeliefUpdate, IdentityObservationCollapsesBelief) {
  auto m = two_state_identity_obs();
  Belief b({0.4, 0.6});
  auto r = belief_update(m, b, 0, 1);
  ASSERT_TRUE(r.valid);
  EXPECT_DOUBLE_EQ(r.belief[0], 0.0);
  EXPECT_DOUBLE_EQ(r.belief[1], 1.0);
  EXPECT_NEAR(r.likelihood, 0.4 * 0.7 + 0.6, 1e-15);
}

TEST(BeliefUpdate, SymmetricModelKeepsUniformBelief) {
  auto m = two_state_uniform();
  auto r = belief_update(m, Belief::uniform(2), 0, 0);
  ASSERT_TRUE(r.valid);
  EXPECT_NEAR(r.belief[0], 0.5, 1e-15);
  EXPECT_NEAR(r.belief[1], 0.5, 1e-15);
  EXPECT_NEAR(r.likelihood, 0.5, 1e-15);
}

TEST(BeliefUpdate, ImpossibleObservationIsFlagged) {
  PomdpBuilder b(2, 1, 2);
  b.add_transition(0, 0, 0, 1.0);
  b.add_transition(0, 1, 0, 1.0);
  b.add_observation(0, 0, 0, 1.0);
  b.add_observation(0, 1, 1, 1.0);
  auto m = std::move(b).build();
  auto r = belief_update(m, Belief::uniform(2), 0, 1);
  EXPECT_FALSE(r.valid);
  EXPECT_EQ(r.likelihood, 0.0);
  EXPECT_THROW(belief_update_or_throw(m, Belief::uniform(2), 0, 1), ZeroLikelihood);
}

TEST(BeliefUpdate, RandomThreeStateModelMatchesForwardFilter) {
  const auto raw = oracle::random_pomdp(3, 2, 2, 7);
  const auto m = oracle::to_model(raw);
  Belief b(raw.b0);
  const std::vector<int> actions{1, 0, 1};
  const std::vector<int> obs{0, 1, 1};
  for (std::size_t t = 0; t < actions.size(); ++t) b = belief_update_or_throw(m, b, actions[t], obs[t]);

  auto expected = oracle::normalized(oracle::joint_by_paths(raw, raw.b0, actions, obs));
  for (Index x = 0; x < 3; ++x) EXPECT_NEAR(b[x], expected[x], 1e-12);

  // Frozen output of the path-enumeration oracle for this seed and history.
  const double frozen[3] = {0.20452658045073593, 0.55343631073666355, 0.24203710881260052};
  for (Index x = 0; x < 3; ++x) EXPECT_NEAR(b[x], frozen[x], 1e-12);
}

TEST(BeliefUpdate, PropertyMatchesExhaustiveFilterOnRandomHistories) {
  std::mt19937_64 g(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(g() % 6);
    const int na = 1 + static_cast<int>(g() % 3);
    const int nz = 1 + static_cast<int>(g() % 4);
    const auto raw = oracle::random_pomdp(n, na, nz, g(), trial % 2 ? 0.3 : 0.0);
    // Alternate dense and sparse storage.
    const auto m = oracle::to_model(raw, trial % 3 == 0 ? 0 : kDefaultSparseThreshold);
    const int len = 1 + static_cast<int>(g() % 6);

    Belief b(raw.b0);
    std::vector<int> actions, obs;
    Rng env(g());
    Index x = sample_belief(b, env);
    for (int t = 0; t < len; ++t) {
      const Index a = static_cast<Index>(g() % na);
      const auto s = simulate_step(m, x, a, env);
      x = s.next_state;
      actions.push_back(a);
      obs.push_back(s.observation);
      auto r = belief_update(m, b, a, s.observation);
      ASSERT_TRUE(r.valid);
      b = r.belief;
      EXPECT_NEAR(b.sum(), 1.0, 1e-9);
      const auto expected = oracle::normalized(oracle::joint_by_paths(raw, raw.b0, actions, obs));
      for (int y = 0; y < n; ++y) ASSERT_NEAR(b[y], expected[y], 1e-9) << "trial " << trial << " t " << t;
    }
  }
}

TEST(BeliefUpdate, LikelihoodsOverObservationsSumToOne) {
  std::mt19937_64 g(99);
  for (int trial = 0; trial < 50; ++trial) {
    const auto raw = oracle::random_pomdp(5, 3, 4, g(), 0.2);
    const auto m = oracle::to_model(raw);
    Belief b(oracle::random_simplex(5, g));
    for (Index a = 0; a < 3; ++a) {
      double total = 0.0;
      for (Index z = 0; z < 4; ++z) total += belief_update(m, b, a, z).likelihood;
      EXPECT_NEAR(total, 1.0, 1e-9);
      auto dist = observation_distribution(m, b, a);
      for (Index z = 0; z < 4; ++z) EXPECT_NEAR(dist[z], belief_update(m, b, a, z).likelihood, 1e-12);
    }
  }
}

TEST(Validate, WellFormedModelHasNoViolations) {
  EXPECT_TRUE(validate(two_state_identity_obs()).empty());
  EXPECT_TRUE(validate(oracle::to_model(oracle::random_pomdp(6, 3, 4, 1))).empty());
}

TEST(Validate, ShortTransitionRowIsReported) {
  PomdpBuilder b(2, 1, 1);
  b.add_transition(0, 0, 0, 1.0);
  b.add_transition(0, 1, 0, 0.9);
  b.add_observation(0, 0, 0, 1.0);
  b.add_observation(0, 1, 0, 1.0);
  auto v = validate(std::move(b).build());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::transition_row);
  EXPECT_EQ(v[0].action, 0u);
  EXPECT_EQ(v[0].row, 1u);
  EXPECT_NEAR(v[0].mass, 0.9, 1e-15);
  EXPECT_NE(v[0].message.find("T[0][1]"), std::string::npos);
}

TEST(Validate, NegativeObservationEntryIsReported) {
  PomdpBuilder b(1, 1, 2);
  b.add_transition(0, 0, 0, 1.0);
  b.add_observation(0, 0, 0, 1.2);
  b.add_observation(0, 0, 1, -0.2);
  auto v = validate(std::move(b).build());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::negative_entry);
}

TEST(Validate, BadInitialBeliefAndDiscount) {
  PomdpBuilder b(2, 1, 1);
  b.add_transition(0, 0, 0, 1.0);
  b.add_transition(0, 1, 1, 1.0);
  b.add_observation(0, 0, 0, 1.0);
  b.add_observation(0, 1, 0, 1.0);
  b.initial_belief(Belief({0.5, 0.4})).discount(1.0);
  auto v = validate(std::move(b).build());
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].kind, Violation::Kind::initial_belief);
  EXPECT_EQ(v[1].kind, Violation::Kind::discount);
}

TEST(SimulateStep, DeterministicModel) {
  PomdpBuilder b(3, 1, 3);
  for (Index x = 0; x < 3; ++x) {
    b.add_transition(0, x, (x + 1) % 3, 1.0);
    b.add_observation(0, x, 2 - x, 1.0);
    b.set_reward(x, 0, 10.0 * x);
  }
  auto m = std::move(b).build();
  Rng rng(1);
  auto s = simulate_step(m, 1, 0, rng);
  EXPECT_EQ(s.next_state, 2u);
  EXPECT_EQ(s.observation, 0u);
  EXPECT_EQ(s.reward, 10.0);
}

TEST(SimulateStep, AbsorbingState) {
  PomdpBuilder b(2, 2, 2);
  for (Index a = 0; a < 2; ++a) {
    b.add_transition(a, 0, 1, 1.0);
    b.add_transition(a, 1, 1, 1.0);
    b.add_observation(a, 0, 0, 1.0);
    b.add_observation(a, 1, 1, 1.0);
    b.set_reward(0, a, -1.0);
  }
  auto m = std::move(b).build();
  Rng rng(5);
  for (Index a = 0; a < 2; ++a) {
    auto s = simulate_step(m, 1, a, rng);
    EXPECT_EQ(s.next_state, 1u);
    EXPECT_EQ(s.observation, 1u);
    EXPECT_EQ(s.reward, 0.0);
  }
}

TEST(SimulateStep, EmpiricalSuccessorFrequenciesWithinThreeSigma) {
  const auto raw = oracle::random_pomdp(5, 2, 3, 31);
  const auto m = oracle::to_model(raw);
  Rng rng(77);
  const int n = 100000;
  std::vector<int> counts(5, 0);
  for (int i = 0; i < n; ++i) {
    auto s = simulate_step(m, 2, 1, rng);
    ++counts[s.next_state];
  }
  for (int y = 0; y < 5; ++y) {
    const double p = raw.T[1][2][y];
    const double sigma = std::sqrt(n * p * (1 - p));
    EXPECT_LE(std::abs(counts[y] - n * p), 3 * sigma + 1) << "successor " << y;
  }
}

TEST(SimulateStep, ConsumesTwoDrawsPerStep) {
  const auto m = oracle::to_model(oracle::random_pomdp(4, 2, 3, 3));
  Rng a(11), b(11);
  simulate_step(m, 0, 0, a);
  b.discard(2);
  EXPECT_EQ(a(), b());
}

TEST(History, ActionsAndObservationsAlternate) {
  History h;
  h.push_action(1);
  EXPECT_TRUE(h.awaiting_observation());
  EXPECT_THROW(h.push_action(0), std::logic_error);
  h.push_observation(2);
  h.push(0, 1);
  EXPECT_EQ(h.length(), 2u);
  EXPECT_EQ(h.action(1), 0u);
  EXPECT_EQ(h.observation(0), 2u);
  History fresh;
  EXPECT_THROW(fresh.push_observation(0), std::logic_error);
}

TEST(ProbabilityTable, DenseAndSparseAgree) {
  std::vector<std::vector<Entry>> rows{{{2, 0.25}, {0, 0.5}, {2, 0.25}}, {{1, 1.0}, {0, 0.0}}};
  auto rows2 = rows;
  ProbabilityTable d(1, 2, 3, std::move(rows), ProbabilityTable::Layout::dense);
  ProbabilityTable s(1, 2, 3, std::move(rows2), ProbabilityTable::Layout::sparse);
  for (Index r = 0; r < 2; ++r)
    for (Index c = 0; c < 3; ++c) EXPECT_EQ(d.row(0, r).at(c), s.row(0, r).at(c));
  EXPECT_EQ(s.row(0, 0).nonzeros(), 2u);
  EXPECT_EQ(s.row(0, 1).nonzeros(), 1u);
  EXPECT_DOUBLE_EQ(s.row(0, 0).at(2), 0.5);
}

TEST(PomdpBuilder, LayoutFollowsThreshold) {
  auto raw = oracle::random_pomdp(6, 1, 2, 4);
  EXPECT_EQ(oracle::to_model(raw).layout(), ProbabilityTable::Layout::dense);
  EXPECT_EQ(oracle::to_model(raw, 5).layout(), ProbabilityTable::Layout::sparse);
}

TEST(ModelIo, RoundTripIsBitExact) {
  auto raw = oracle::random_pomdp(6, 3, 4, 12, 0.3);
  raw.gamma = 0.9123456789;
  for (std::size_t threshold : {std::size_t{0}, kDefaultSparseThreshold}) {
    const auto m = oracle::to_model(raw, threshold);
    std::stringstream ss;
    write_model(ss, m);
    const auto back = read_model(ss, threshold);
    EXPECT_EQ(back.content_hash(), m.content_hash());
    EXPECT_EQ(back.discount(), m.discount());
    for (Index a = 0; a < 3; ++a)
      for (Index x = 0; x < 6; ++x) {
        for (Index y = 0; y < 6; ++y) EXPECT_EQ(back.transition(a, x).at(y), m.transition(a, x).at(y));
        EXPECT_EQ(back.reward(x, a), m.reward(x, a));
      }
    std::stringstream again;
    write_model(again, back);
    std::stringstream first;
    write_model(first, m);
    EXPECT_EQ(again.str(), first.str());
  }
}

TEST(ModelIo, RejectsMalformedInput) {
  std::istringstream bad_header("atpo-pomdp 9\n");
  EXPECT_THROW(read_model(bad_header), FormatError);
  std::istringstream truncated("atpo-pomdp 1\nlabel x\nstates 2\n");
  EXPECT_THROW(read_model(truncated), FormatError);
  std::istringstream out_of_range(
      "atpo-pomdp 1\nlabel x\nstates 1\nactions 1\nobservations 1\ndiscount 0.5\nT 1\n0 0 3 1\n");
  EXPECT_THROW(read_model(out_of_range), FormatError);
}

TEST(Mmdp, JointIndexIsLexicographicWithAgentZeroMostSignificant) {
  ProbabilityTable t(6, 1, 1, std::vector<std::vector<Entry>>(6, {{0, 1.0}}), ProbabilityTable::Layout::dense);
  TabularMmdp m("t", 1, {2, 3}, std::move(t), std::vector<double>(6, 0.0), 0.9);
  EXPECT_EQ(m.num_joint_actions(), 6u);
  std::vector<Index> pair{1, 2};
  EXPECT_EQ(m.joint_index(pair), 5u);
  EXPECT_EQ(m.decompose(4), (std::vector<Index>{1, 1}));
  EXPECT_TRUE(m.validate().empty());
}

TEST(Mmdp, MarginalizingTeammateAveragesJointRows) {
  // Two states; the teammate's action alone decides the successor.
  std::vector<std::vector<Entry>> rows(4 * 2);
  for (Index j = 0; j < 4; ++j)
    for (Index x = 0; x < 2; ++x) rows[j * 2 + x] = {{static_cast<Index>(j % 2), 1.0}};
  std::vector<double> r(2 * 4);
  for (Index x = 0; x < 2; ++x)
    for (Index j = 0; j < 4; ++j) r[x * 4 + j] = static_cast<double>(j);
  TabularMmdp team("t", 2, {2, 2}, ProbabilityTable(4, 2, 2, std::move(rows), ProbabilityTable::Layout::dense),
                   std::move(r), 0.9);
  auto single = marginalize_teammates(team, [](Index) { return std::vector<Entry>{{0, 0.25}, {1, 0.75}}; });
  EXPECT_EQ(single.num_joint_actions(), 2u);
  EXPECT_NEAR(single.transition(1, 0).at(0), 0.25, 1e-15);
  EXPECT_NEAR(single.transition(1, 0).at(1), 0.75, 1e-15);
  EXPECT_NEAR(single.reward(0, 1), 0.25 * 2 + 0.75 * 3, 1e-15);
}
