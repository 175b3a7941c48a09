#include <gtest/gtest.h>

#include "autobandit/policies.hpp"
#include "test_util.hpp"

namespace ab = autobandit;

namespace {

ab::EpsilonSchedule linear(double eps0, std::size_t t_anneal) {
  return {ab::ScheduleKind::linear, eps0, t_anneal};
}

}  // namespace

TEST(EpsilonAt, LinearAnnealFromPointNine) {
  const auto s = linear(0.9, 1000);
  EXPECT_NEAR(ab::epsilon_at(s, 1, 1), 0.8991, 1e-12);
  EXPECT_EQ(ab::epsilon_at(s, 1000, 1), 0.0);
  EXPECT_EQ(ab::epsilon_at(s, 5000, 3), 0.0);
}

TEST(EpsilonAt, InverseN) {
  const ab::EpsilonSchedule s{ab::ScheduleKind::inverse_n, 1.0, 1};
  EXPECT_DOUBLE_EQ(ab::epsilon_at(s, 17, 4), 0.25);
  EXPECT_DOUBLE_EQ(ab::epsilon_at(s, 1, 1), 1.0);
  const ab::EpsilonSchedule big{ab::ScheduleKind::inverse_n, 3.0, 1};
  EXPECT_DOUBLE_EQ(ab::epsilon_at(big, 1, 2), 1.0);
  EXPECT_DOUBLE_EQ(ab::epsilon_at(big, 1, 6), 0.5);
}

TEST(EpsilonAt, Fixed) {
  const ab::EpsilonSchedule s{ab::ScheduleKind::fixed, 0.1, 1};
  EXPECT_DOUBLE_EQ(ab::epsilon_at(s, 1, 1), 0.1);
  EXPECT_DOUBLE_EQ(ab::epsilon_at(s, 99999, 50), 0.1);
}

TEST(EpsilonAt, NonIncreasingAndBounded) {
  const auto lin = linear(0.9, 777);
  const ab::EpsilonSchedule inv{ab::ScheduleKind::inverse_n, 2.0, 1};
  double prev_lin = 1.0, prev_inv = 1.0;
  for (std::size_t t = 1; t < 2000; ++t) {
    const double e = ab::epsilon_at(lin, t, 1);
    EXPECT_LE(e, prev_lin);
    EXPECT_TRUE(e >= 0.0 && e <= 1.0);
    prev_lin = e;
    const double f = ab::epsilon_at(inv, 1, t);
    EXPECT_LE(f, prev_inv);
    EXPECT_TRUE(f >= 0.0 && f <= 1.0);
    prev_inv = f;
  }
}

TEST(EpsilonSchedule, JsonRoundTripAndValidation) {
  const auto s = linear(0.9, 5000);
  const nlohmann::json j = s;
  EXPECT_EQ(j.at("kind"), "linear");
  EXPECT_EQ(j.at("T_anneal"), 5000);
  EXPECT_EQ(j.get<ab::EpsilonSchedule>(), s);
  EXPECT_THROW((nlohmann::json{{"kind", "cosine"}}.get<ab::EpsilonSchedule>()), ab::ConfigError);
  EXPECT_THROW((nlohmann::json{{"kind", "linear"}, {"epsilon0", 1.5}}.get<ab::EpsilonSchedule>()), ab::ConfigError);
  EXPECT_THROW((nlohmann::json{{"kind", "linear"}, {"T_anneal", 0}}.get<ab::EpsilonSchedule>()), ab::ConfigError);
}

TEST(SelectAction, PureGreedy) {
  ab::Rng rng(1);
  const std::vector<double> q{0.1, 0.9};
  const auto sel = ab::select_action(q, 0.0, rng);
  EXPECT_EQ(sel.action.index, 1u);
  EXPECT_FALSE(sel.explored);
}

TEST(SelectAction, GreedyTieGoesToLowestIndex) {
  ab::Rng rng(1);
  const std::vector<double> q{0.5, 0.5};
  EXPECT_EQ(ab::select_action(q, 0.0, rng).action.index, 0u);
}

TEST(SelectAction, UniformDrawMapping) {
  EXPECT_EQ(ab::scale_to_index(0.6, 3), 1u);
  EXPECT_EQ(ab::scale_to_index(0.0, 3), 0u);
  EXPECT_EQ(ab::scale_to_index(0.9999999, 3), 2u);

  // With eps = 1 the action is floor(u * K) of the second draw.
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    testutil::ReferenceStream ref(seed);
    ref.next();
    const double u = ref.next();
    ab::Rng rng(seed);
    const std::vector<double> q{0.0, 0.0, 0.0};
    const auto sel = ab::select_action(q, 1.0, rng);
    EXPECT_TRUE(sel.explored);
    EXPECT_EQ(sel.action.index, static_cast<std::size_t>(u * 3));
  }
}

TEST(SelectAction, ConsumesExactlyTwoDraws) {
  for (double eps : {0.0, 0.3, 1.0}) {
    ab::Rng rng(5);
    testutil::ReferenceStream ref(5);
    const std::vector<double> q{0.2, 0.4};
    ab::select_action(q, eps, rng);
    ref.next();
    ref.next();
    EXPECT_EQ(rng.uniform(), ref.next());
  }
}

TEST(SelectAction, ArgmaxInvariantUnderPositiveScaling) {
  ab::Rng data(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> q(1 + data.index(6));
    for (auto& v : q) v = data.uniform();
    std::vector<double> scaled = q;
    const double c = 0.01 + data.uniform() * 100;
    for (auto& v : scaled) v *= c;
    ab::Rng a(trial), b(trial);
    EXPECT_EQ(ab::select_action(q, 0.0, a).action, ab::select_action(scaled, 0.0, b).action);
  }
}

TEST(SelectAction, ExploredFraction) {
  ab::Rng rng(31);
  const std::vector<double> q{0.3, 0.6, 0.1};
  int explored = 0;
  for (int i = 0; i < 10000; ++i) explored += ab::select_action(q, 0.5, rng).explored ? 1 : 0;
  EXPECT_NEAR(explored / 10000.0, 0.5, 0.02);
}

TEST(SelectAction, QModelPath) {
  ab::InteractionLog log(ab::FeatureSchema::numeric(1), 2);
  for (std::size_t t = 1; t <= 4; ++t)
    log.append({t, ab::Context{{0.1 * static_cast<double>(t)}}, ab::ActionId{t % 2}, ab::Reward(0.5), 0, false});
  const auto fz = ab::fit_featurizer(log);
  ab::ModelArtifact m;
  m.candidate = ab::CandidateSpec::ridge(0.01);
  m.weights = {0.0, 0.1, 0.9};
  const std::vector<ab::ModelArtifact> one{m};
  const auto q = ab::build_qmodel(one, fz, 1);
  ab::Rng rng(2);
  const auto sel = ab::select_action(q, ab::Context{{0.3}}, 0.0, 2, rng);
  EXPECT_EQ(sel.action.index, 1u);
  EXPECT_THROW(ab::select_action(q, ab::Context{{0.3}}, 0.0, 3, rng), ab::ConfigError);
}

TEST(RandomPolicy, SingleAction) {
  ab::Rng rng(3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(ab::random_policy(1, rng).index, 0u);
}

TEST(RandomPolicy, BalancedFrequencies) {
  ab::Rng rng(4);
  int ones = 0;
  for (int i = 0; i < 100000; ++i) ones += static_cast<int>(ab::random_policy(2, rng).index);
  EXPECT_NEAR(ones / 100000.0, 0.5, 0.005);
}

TEST(RandomPolicy, ReproducibleAndEqualToFullExploration) {
  ab::Rng a(9), b(9), c(9);
  const std::vector<double> q{0.9, 0.1, 0.5, 0.2};
  for (int i = 0; i < 1000; ++i) {
    const auto x = ab::random_policy(4, a);
    EXPECT_EQ(x, ab::random_policy(4, b));
    EXPECT_EQ(x, ab::select_action(q, 1.0, c).action);
  }
}

TEST(OnlineBaseline, OneStepArithmetic) {
  ab::OnlineLinearBaseline b(2, 3, 0.1);
  const std::vector<double> x{1.0, 0.0, 0.0};
  const auto next = ab::baseline_update(b, x, ab::ActionId{0}, ab::Reward(1.0));
  EXPECT_NEAR(next.weights(ab::ActionId{0})[0], 0.1, 1e-15);
  EXPECT_EQ(next.weights(ab::ActionId{0})[1], 0.0);
  EXPECT_NEAR(next.intercept(ab::ActionId{0}), 0.1, 1e-15);
  EXPECT_EQ(next.weights(ab::ActionId{1})[0], 0.0);
  EXPECT_EQ(next.intercept(ab::ActionId{1}), 0.0);
}

TEST(OnlineBaseline, ZeroResidualLeavesWeights) {
  ab::OnlineLinearBaseline b(2, 2, 0.3);
  const std::vector<double> x{0.4, -0.2};
  b.update(x, ab::ActionId{1}, ab::Reward(0.7));
  const double pred = b.predict(x, ab::ActionId{1});
  // The reward has to be representable and equal to the prediction.
  ab::OnlineLinearBaseline zero(1, 2, 0.3);
  const std::vector<double> origin{0.0, 0.0};
  EXPECT_EQ(ab::baseline_update(zero, origin, ab::ActionId{0}, ab::Reward(0.0)), zero);
  const auto again = ab::baseline_update(b, x, ab::ActionId{1}, ab::Reward(pred));
  EXPECT_EQ(again, b);
}

TEST(OnlineBaseline, ConvergesToRepeatedTarget) {
  const std::vector<double> x{0.5, -1.0, 0.25};
  const double lr = 0.1, r = 0.8;
  // Oracle: the prediction error shrinks by (1 - lr * (|x|^2 + 1)) per step.
  double pred = 0.0;
  const double norm = 0.25 + 1.0 + 0.0625 + 1.0;
  for (int i = 0; i < 500; ++i) pred += lr * (r - pred) * norm;
  ASSERT_NEAR(pred, r, 1e-3);

  ab::OnlineLinearBaseline b(2, 3, lr);
  for (int i = 0; i < 500; ++i) b.update(x, ab::ActionId{1}, ab::Reward(r));
  EXPECT_NEAR(b.predict(x, ab::ActionId{1}), pred, 1e-9);
  EXPECT_NEAR(b.predict(x, ab::ActionId{1}), r, 1e-3);
  EXPECT_EQ(b.predict(x, ab::ActionId{0}), 0.0);
}

TEST(OnlineBaseline, Validation) {
  EXPECT_THROW(ab::OnlineLinearBaseline(0, 2, 0.1), ab::ConfigError);
  EXPECT_THROW(ab::OnlineLinearBaseline(2, 2, 0.0), ab::ConfigError);
  ab::OnlineLinearBaseline b(2, 2, 0.1);
  const std::vector<double> bad{1.0};
  EXPECT_THROW(b.predict(bad, ab::ActionId{0}), ab::SchemaError);
  const std::vector<double> ok{1.0, 2.0};
  EXPECT_THROW(b.predict(ok, ab::ActionId{2}), ab::ActionError);
}
