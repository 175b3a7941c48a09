#include <gtest/gtest.h>

#include <cmath>

#include "autobandit/synthetic_env.hpp"
#include "test_util.hpp"

namespace ab = autobandit;

namespace {

ab::SyntheticEnvSpec single_factor(std::vector<double> mu, double sigma, double weight, double base = 0.0) {
  ab::SyntheticEnvSpec spec;
  spec.d = mu.size();
  spec.num_actions = 1;
  spec.base_prob = base;
  spec.factors = {{{std::move(mu), sigma, weight}}};
  return spec;
}

}  // namespace

TEST(GenerateSpec, TwoDimensionsTwoFactors) {
  const auto spec = ab::generate_spec(2, 2, 2, {0.1, 0.3}, 0.0, 17);
  ASSERT_EQ(spec.factors.size(), 2u);
  for (const auto& per_action : spec.factors) {
    ASSERT_EQ(per_action.size(), 2u);
    for (const auto& f : per_action) {
      ASSERT_EQ(f.mu.size(), 2u);
      for (double m : f.mu) EXPECT_TRUE(m >= 0.0 && m <= 1.0);
      EXPECT_TRUE(f.sigma >= 0.1 && f.sigma <= 0.3);
      EXPECT_TRUE(f.weight >= 0.0 && f.weight <= 1.0);
    }
  }
  EXPECT_NO_THROW(spec.validate());
}

TEST(GenerateSpec, FiveDimensionalMeans) {
  const auto spec = ab::generate_spec(5, 2, 5, {0.2, 0.5}, 0.05, 3);
  for (const auto& per_action : spec.factors) {
    ASSERT_EQ(per_action.size(), 5u);
    for (const auto& f : per_action) EXPECT_EQ(f.mu.size(), 5u);
  }
}

TEST(GenerateSpec, DeterministicGivenSeed) {
  EXPECT_EQ(ab::generate_spec(3, 4, 2, {0.1, 0.2}, 0.1, 123), ab::generate_spec(3, 4, 2, {0.1, 0.2}, 0.1, 123));
  EXPECT_NE(ab::generate_spec(3, 4, 2, {0.1, 0.2}, 0.1, 123), ab::generate_spec(3, 4, 2, {0.1, 0.2}, 0.1, 124));
}

TEST(GenerateSpec, InvalidRanges) {
  EXPECT_THROW(ab::generate_spec(0, 2, 2, {0.1, 0.3}, 0.0, 1), ab::ConfigError);
  EXPECT_THROW(ab::generate_spec(2, 0, 2, {0.1, 0.3}, 0.0, 1), ab::ConfigError);
  EXPECT_THROW(ab::generate_spec(2, 2, 0, {0.1, 0.3}, 0.0, 1), ab::ConfigError);
  EXPECT_THROW(ab::generate_spec(2, 2, 2, {0.0, 0.3}, 0.0, 1), ab::ConfigError);
  EXPECT_THROW(ab::generate_spec(2, 2, 2, {0.4, 0.3}, 0.0, 1), ab::ConfigError);
  EXPECT_THROW(ab::generate_spec(2, 2, 2, {0.1, 0.3}, -1.0, 1), ab::ConfigError);
}

TEST(SampleContext, RangeAndLength) {
  ab::Rng rng(1);
  const auto one = ab::sample_context(ab::generate_spec(1, 1, 1, {0.1, 0.1}, 0, 0), rng);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_TRUE(one.numeric(0) >= 0.0 && one.numeric(0) <= 1.0);
  EXPECT_EQ(ab::sample_context(ab::generate_spec(5, 1, 1, {0.1, 0.1}, 0, 0), rng).size(), 5u);
}

TEST(SampleContext, UniformMean) {
  const auto spec = ab::generate_spec(1, 1, 1, {0.1, 0.1}, 0, 0);
  ab::Rng rng(2024);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) sum += ab::sample_context(spec, rng).numeric(0);
  EXPECT_NEAR(sum / 10000.0, 0.5, 0.02);
}

TEST(SampleContext, ReproducibleGivenSeed) {
  const auto spec = ab::generate_spec(4, 2, 2, {0.1, 0.3}, 0, 9);
  ab::Rng a(77), b(77);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(ab::sample_context(spec, a), ab::sample_context(spec, b));
}

TEST(RewardProbability, KernelAtCentre) {
  const auto spec = single_factor({0.3, 0.6}, 0.2, 1.0);
  EXPECT_DOUBLE_EQ(ab::reward_probability(spec, ab::Context{{0.3, 0.6}}, ab::ActionId{0}), 1.0);
}

TEST(RewardProbability, KernelOffCentre) {
  // |s - mu|^2 = 0.01, sigma = 0.1 -> exp(-0.01 / 0.02) = exp(-0.5)
  const auto spec = single_factor({0.4, 0.5}, 0.1, 1.0);
  EXPECT_NEAR(ab::reward_probability(spec, ab::Context{{0.5, 0.5}}, ab::ActionId{0}), 0.6065306597126334, 1e-12);
}

TEST(RewardProbability, EmptySumIsBase) {
  ab::SyntheticEnvSpec spec;
  spec.d = 2;
  spec.num_actions = 1;
  spec.base_prob = 0.2;
  spec.factors = {{}};
  EXPECT_DOUBLE_EQ(ab::reward_probability(spec, ab::Context{{0.1, 0.9}}, ab::ActionId{0}), 0.2);
}

TEST(RewardProbability, DimensionMismatch) {
  const auto spec = single_factor({0.3, 0.6}, 0.2, 1.0);
  EXPECT_THROW(ab::reward_probability(spec, ab::Context{{0.3}}, ab::ActionId{0}), ab::SchemaError);
}

TEST(RewardProbability, AlwaysInUnitInterval) {
  ab::Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto spec = ab::generate_spec(3, 3, 6, {0.05, 0.8}, 0.0, 100 + static_cast<std::uint64_t>(trial), rng.uniform());
    for (int i = 0; i < 200; ++i) {
      const auto s = ab::sample_context(spec, rng);
      for (std::size_t a = 0; a < 3; ++a) {
        const double p = ab::reward_probability(spec, s, ab::ActionId{a});
        EXPECT_TRUE(p >= 0.0 && p <= 1.0);
      }
    }
  }
}

TEST(Pull, DegenerateProbabilities) {
  ab::Rng rng(3);
  const auto always = testutil::constant_env({1.0, 0.0});
  const ab::Context s{{0.2}};
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(ab::pull(always, s, ab::ActionId{0}, rng).value(), 1.0);
    EXPECT_EQ(ab::pull(always, s, ab::ActionId{1}, rng).value(), 0.0);
  }
}

TEST(Pull, EmpiricalMeanMatchesProbability) {
  const auto spec = testutil::constant_env({0.6});
  ab::Rng rng(11);
  const ab::Context s{{0.5}};
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += ab::pull(spec, s, ab::ActionId{0}, rng).value();
  EXPECT_NEAR(sum / n, 0.6, 0.005);
}

TEST(Pull, ConvergesWithinThreeSigma) {
  const auto spec = ab::generate_spec(2, 2, 3, {0.2, 0.4}, 0.0, 4, 0.1);
  ab::Rng rng(12);
  const int n = 20000;
  for (int c = 0; c < 5; ++c) {
    const auto s = ab::sample_context(spec, rng);
    for (std::size_t a = 0; a < 2; ++a) {
      const double p = ab::reward_probability(spec, s, ab::ActionId{a});
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += ab::pull(spec, s, ab::ActionId{a}, rng).value();
      EXPECT_LE(std::abs(sum / n - p), 3.0 * std::sqrt(p * (1.0 - p) / n) + 1e-12);
    }
  }
}

TEST(OptimalAction, Argmax) {
  const auto spec = testutil::constant_env({0.3, 0.7});
  const auto best = ab::optimal_action(spec, ab::Context{{0.1}});
  EXPECT_EQ(best.action.index, 1u);
  EXPECT_DOUBLE_EQ(best.best_value, 0.7);
}

TEST(OptimalAction, TieGoesToLowestIndex) {
  const auto best = ab::optimal_action(testutil::constant_env({0.5, 0.5}), ab::Context{{0.1}});
  EXPECT_EQ(best.action.index, 0u);
  EXPECT_DOUBLE_EQ(best.best_value, 0.5);
}

TEST(OptimalAction, MatchesExhaustiveEvaluationOnGrid) {
  const auto spec = ab::generate_spec(2, 3, 2, {0.1, 0.3}, 0.0, 2718);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const ab::Context s{{(i + 0.5) / 10.0, (j + 0.5) / 10.0}};
      std::size_t arg = 0;
      double best = -1.0;
      for (std::size_t a = 0; a < 3; ++a) {
        const double p = ab::reward_probability(spec, s, ab::ActionId{a});
        if (p > best) {
          best = p;
          arg = a;
        }
      }
      const auto got = ab::optimal_action(spec, s);
      EXPECT_EQ(got.action.index, arg);
      EXPECT_EQ(got.best_value, best);
    }
  }
}

TEST(OptimalAction, DominatesEveryAction) {
  const auto spec = ab::generate_spec(4, 5, 3, {0.1, 0.5}, 0.0, 31);
  ab::Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const auto s = ab::sample_context(spec, rng);
    const auto best = ab::optimal_action(spec, s);
    for (std::size_t a = 0; a < 5; ++a) EXPECT_GE(best.best_value, ab::reward_probability(spec, s, ab::ActionId{a}));
  }
}

TEST(GridHeatmap, ConstantField) {
  ab::SyntheticEnvSpec spec;
  spec.d = 2;
  spec.num_actions = 2;
  spec.base_prob = 0.5;
  spec.factors = {{}, {}};
  const auto g = ab::grid_heatmap(spec, {0, 1}, 3);
  ASSERT_EQ(g.size(), 3u);
  for (const auto& row : g) {
    ASSERT_EQ(row.size(), 3u);
    for (double v : row) EXPECT_DOUBLE_EQ(v, 0.5);
  }
}

TEST(GridHeatmap, CentredFactorPeaksAtCentreCell) {
  const auto spec = single_factor({0.5, 0.5}, 0.2, 0.9);
  const auto g = ab::grid_heatmap(spec, {0, 1}, 5);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 5; ++c)
      if (r != 2 || c != 2) EXPECT_LT(g[r][c], g[2][2]);
}

TEST(GridHeatmap, MatchesDirectEvaluationInFiveDimensions) {
  const auto spec = ab::generate_spec(5, 2, 5, {0.2, 0.5}, 0.0, 5);
  const std::vector<double> fixed{0.1, 0.2, 0.3, 0.4, 0.5};
  const auto g = ab::grid_heatmap(spec, {0, 1}, 4, fixed);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const ab::Context s{{(r + 0.5) / 4.0, (c + 0.5) / 4.0, 0.3, 0.4, 0.5}};
      const double expect = 0.5 * (ab::reward_probability(spec, s, ab::ActionId{0}) +
                                   ab::reward_probability(spec, s, ab::ActionId{1}));
      EXPECT_NEAR(g[r][c], expect, 1e-15);
    }
  }
}

TEST(GridHeatmap, InvalidDims) {
  const auto spec = ab::generate_spec(2, 2, 2, {0.1, 0.3}, 0.0, 1);
  EXPECT_THROW(ab::grid_heatmap(spec, {0, 2}, 3), ab::ConfigError);
  EXPECT_THROW(ab::grid_heatmap(spec, {1, 1}, 3), ab::ConfigError);
  EXPECT_THROW(ab::grid_heatmap(spec, {0, 1}, 0), ab::ConfigError);
}

TEST(SpecJson, RoundTrip) {
  const auto spec = ab::generate_spec(3, 2, 4, {0.1, 0.3}, 0.05, 99, 0.1);
  const nlohmann::json j = spec;
  for (const char* key : {"d", "K", "base_prob", "noise_std", "seed", "factors"}) EXPECT_TRUE(j.contains(key));
  EXPECT_EQ(nlohmann::json::parse(j.dump()).get<ab::SyntheticEnvSpec>(), spec);
}

TEST(SpecJson, RejectsInvalidFactor) {
  auto j = nlohmann::json(ab::generate_spec(2, 1, 1, {0.1, 0.3}, 0.0, 1));
  j["factors"][0][0]["sigma"] = 0.0;
  EXPECT_THROW(j.get<ab::SyntheticEnvSpec>(), ab::ConfigError);
  j["factors"][0][0]["sigma"] = 0.1;
  j["factors"][0][0]["mu"] = {0.5};
  EXPECT_THROW(j.get<ab::SyntheticEnvSpec>(), ab::ConfigError);
}
