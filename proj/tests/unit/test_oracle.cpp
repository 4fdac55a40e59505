#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "collab/oracle.hpp"
#include "test_util.hpp"

namespace collab {
namespace {

DiscreteDistribution fair_coins(std::size_t m) { return independent_binary(std::vector<double>(m, 0.5)); }

double parity(std::span<const std::uint32_t> x) { return x[0] == x[1] ? 1.0 : -1.0; }

TEST(Distribution, IndependentBinarySupport) {
  const auto d = independent_binary(std::vector<double>{0.3, 0.5});
  EXPECT_EQ(d.num_points(), 4u);
  EXPECT_NO_THROW(d.validate());
  double p11 = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (d.level(i, 0) == 1 && d.level(i, 1) == 1) p11 = d.probability[i];
  }
  EXPECT_DOUBLE_EQ(p11, 0.15);
  EXPECT_COLLAB_ERROR(fair_coins(21), ErrorCategory::Sizing);
}

TEST(Distribution, ValidateChecksMass) {
  auto d = fair_coins(2);
  d.probability[0] += 1e-9;
  EXPECT_COLLAB_ERROR(d.validate(), ErrorCategory::Argument);
}

TEST(Effects, AdditiveCoin) {
  const auto d = fair_coins(2);
  const auto spec = tabulate(d, [](auto x) { return x[0] - 0.5; });
  const std::size_t one[] = {0};
  const auto g1 = population_g(d, spec, one);
  ASSERT_EQ(g1.values.size(), 2u);
  EXPECT_DOUBLE_EQ(g1.values[0], -0.5);
  EXPECT_DOUBLE_EQ(g1.values[1], 0.5);
  const std::size_t two[] = {1};
  for (double v : population_g(d, spec, two).values) EXPECT_DOUBLE_EQ(v, 0.0);
  EXPECT_DOUBLE_EQ(additive_effect(d, spec, 0), 0.25);
}

TEST(Effects, Parity) {
  const auto d = fair_coins(3);
  const auto spec = tabulate(d, parity);
  const std::size_t pair[] = {0, 1};
  const auto g = population_g(d, spec, pair);
  ASSERT_EQ(g.configurations.size(), 4u);
  for (std::size_t c = 0; c < 4; ++c) {
    const bool agree = g.configurations[c][0] == g.configurations[c][1];
    EXPECT_DOUBLE_EQ(g.values[c], agree ? 1.0 : -1.0);
  }
  EXPECT_DOUBLE_EQ(additive_effect(d, spec, 0), 0.0);
  EXPECT_DOUBLE_EQ(interaction_effect(d, spec, 0, 1), 1.0);
  EXPECT_DOUBLE_EQ(interaction_effect(d, spec, 0, 2), 0.0);
}

TEST(Effects, ZeroFunction) {
  const auto d = fair_coins(3);
  const auto spec = tabulate(d, [](auto) { return 0.0; });
  for (std::size_t m = 0; m < 3; ++m) EXPECT_EQ(additive_effect(d, spec, m), 0.0);
  EXPECT_EQ(interaction_effect(d, spec, 1, 2), 0.0);
  const std::size_t none[] = {0, 0};
  EXPECT_COLLAB_ERROR(population_g(d, spec, none), ErrorCategory::Argument);
  EXPECT_COLLAB_ERROR(population_g(d, spec, std::span<const std::size_t>{}), ErrorCategory::Argument);
}

TEST(Effects, CorrelatedGroupsUseConditionalMeans) {
  // X1 = X2 with probability 0.8; f = X1. Conditioning on X2 carries part of X1.
  DiscreteDistribution d;
  d.arity = {2, 2};
  d.levels = {0, 0, 0, 1, 1, 0, 1, 1};
  d.probability = {0.4, 0.1, 0.1, 0.4};
  const auto spec = tabulate(d, [](auto x) { return static_cast<double>(x[0]); });
  // f - E(f | X2) = X1 - (0.2 + 0.6 X2); its mean given X1 is +-0.32.
  EXPECT_NEAR(additive_effect(d, spec, 0), 0.1024, 1e-12);
  const std::vector<double> h = spec.f;
  const std::size_t j[] = {1};
  EXPECT_NEAR(projected_variance(d, h, j), 0.09, 1e-12);
}

TEST(Pursuit, AdditiveOrderFollowsEffectSize) {
  const auto d = fair_coins(3);
  const double beta[] = {1.0, 3.0, 2.0};
  const auto spec = tabulate(d, [&](auto x) { return beta[0] * x[0] + beta[1] * x[1] + beta[2] * x[2]; });
  const auto path = matching_pursuit_path(d, spec, 3);
  ASSERT_EQ(path.steps.size(), 6u);
  EXPECT_EQ(path.steps[0].selected, std::vector<std::size_t>{1});
  EXPECT_EQ(path.steps[1].selected, std::vector<std::size_t>{2});
  EXPECT_EQ(path.steps[2].selected, std::vector<std::size_t>{0});
  EXPECT_DOUBLE_EQ(path.steps[0].objective, 9.0 / 4.0);
  EXPECT_DOUBLE_EQ(path.steps[2].objective, 1.0 / 4.0);
}

TEST(Pursuit, InteractionFollowsHeredity) {
  const auto d = fair_coins(3);
  const auto spec = tabulate(d, [](auto x) { return 0.3 * x[0] + parity(x); });
  const auto path = matching_pursuit_path(d, spec, 2);
  EXPECT_EQ(path.steps[0].selected, std::vector<std::size_t>{0});
  bool found = false;
  for (std::size_t s = 2; s < 4 && !found; ++s) {
    if (path.steps[s].selected == std::vector<std::size_t>{0, 1}) {
      found = true;
      ASSERT_TRUE(path.steps[s].k_hat);
      EXPECT_EQ(*path.steps[s].k_hat, 0u);
      EXPECT_NEAR(path.steps[s].objective, 1.0, 1e-12);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Pursuit, ZeroFunctionTakesLexicographicPath) {
  const auto d = fair_coins(3);
  const auto spec = tabulate(d, [](auto) { return 0.0; });
  const auto path = matching_pursuit_path(d, spec, 2);
  for (const auto& step : path.steps) EXPECT_EQ(step.objective, 0.0);
  EXPECT_EQ(path.steps[0].selected, std::vector<std::size_t>{0});
  EXPECT_EQ(path.steps[2].selected, (std::vector<std::size_t>{0, 1}));
}

TEST(Pursuit, ResidualsStayCentered) {
  const auto d = independent_binary(std::vector<double>{0.3, 0.6, 0.5});
  const auto spec = tabulate(d, [](auto x) { return 2.0 * x[0] - x[1] + 1.5 * (x[1] == x[2]); });
  const auto path = matching_pursuit_path(d, spec, 3);
  ASSERT_EQ(path.residual.size(), 7u);
  for (const auto& r : path.residual) {
    double mean = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) mean += d.probability[i] * r[i];
    EXPECT_NEAR(mean, 0.0, 1e-12);
  }
  EXPECT_COLLAB_ERROR(matching_pursuit_path(d, spec, 4), ErrorCategory::Argument);
}

TEST(Oracle, BruteForceEdgeCases) {
  Matrix x(3, 2);
  x(0, 0) = x(1, 0) = x(2, 0) = 1.0;
  const std::vector<double> r = {1.0, 2.0, 4.0};
  const std::size_t block[] = {0, 1};
  EXPECT_EQ(brute_force_split_score(r, x, std::span<const RowIndex>{}, block), 0.0);
  const RowIndex rows[] = {0, 1, 2};
  EXPECT_NEAR(brute_force_split_score(r, x, rows, block), 49.0 / 3.0, 1e-12);
}

TEST(Oracle, TextFormatRoundTrip) {
  std::istringstream in(
      "# two coins and a three-level group\n"
      "groups 1 1 3\n"
      "labels a b c\n"
      "noise_sd 0.5\n"
      "00100 0.25 1\n"
      "01010 0.25 2\n"
      "10001 0.25 3\n"
      "11100 0.25 6\n");
  const OracleModel m = parse_oracle_model(in);
  EXPECT_EQ(m.dist.arity, (std::vector<std::size_t>{2, 2, 3}));
  EXPECT_EQ(m.dist.labels, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(m.spec.noise_sd, 0.5);
  EXPECT_EQ(m.dist.level(2, 2), 2u);
  EXPECT_DOUBLE_EQ(m.spec.f[3], 3.0);  // centered: mean 3
  std::istringstream again(format_oracle_model(m));
  const OracleModel back = parse_oracle_model(again);
  EXPECT_EQ(back.dist.levels, m.dist.levels);
  EXPECT_EQ(back.dist.probability, m.dist.probability);
  for (std::size_t i = 0; i < m.spec.f.size(); ++i) EXPECT_NEAR(back.spec.f[i], m.spec.f[i], 1e-15);
  std::istringstream bad("groups 1\n0 0.5 1\n1 0.4 2\n");
  EXPECT_COLLAB_ERROR(parse_oracle_model(bad), ErrorCategory::Argument);
  std::istringstream width("groups 2\n11 1 0\n");
  EXPECT_COLLAB_ERROR(parse_oracle_model(width), ErrorCategory::Schema);
}

}  // namespace
}  // namespace collab
