#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "collab/datagen.hpp"
#include "collab/evaluation.hpp"
#include "test_util.hpp"

namespace collab {
namespace {

RawTable y1_table(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix x = gaussian_copula_ar1(n, 10, 0.1, rng);
  const auto y = model_y1(x, rng);
  std::istringstream in(simulated_csv(x, y));
  return parse_csv(in);
}

std::vector<ColumnSpec> y1_specs() {
  std::vector<ColumnSpec> specs;
  for (int j = 1; j <= 10; ++j) specs.push_back({"x" + std::to_string(j), ColumnRole::Continuous});
  specs.push_back({"y", ColumnRole::Response});
  return specs;
}

TEST(Split, Proportions) {
  Rng rng(1);
  const auto s = split_48_32_20(100, rng);
  EXPECT_EQ(s.train.size(), 48u);
  EXPECT_EQ(s.validation.size(), 32u);
  EXPECT_EQ(s.test.size(), 20u);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.validation.begin(), s.validation.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 100u);
  const auto small = split_48_32_20(10, rng);
  EXPECT_EQ(small.train.size(), 5u);
  EXPECT_EQ(small.validation.size(), 3u);
  EXPECT_EQ(small.test.size(), 2u);
  EXPECT_COLLAB_ERROR(split_48_32_20(9, rng), ErrorCategory::Argument);
}

TEST(Metric, R2) {
  const std::vector<double> truth = {1, 2, 3, 4};
  EXPECT_EQ(r2(truth, truth), 1.0);
  EXPECT_EQ(r2(std::vector<double>(4, 2.5), truth), 0.0);
  EXPECT_EQ(r2(std::vector<double>{1, 1}, std::vector<double>{0, 2}), 0.0);
  EXPECT_COLLAB_ERROR(r2(std::vector<double>{1, 1}, std::vector<double>{3, 3}), ErrorCategory::Metric);
}

TEST(Metric, WinRates) {
  const auto three = adjusted_win_rates(std::vector<double>{0.13, 0.135, 0.142});
  EXPECT_EQ(three[0], 0.0);
  EXPECT_NEAR(three[1], 0.005 / 0.012, 1e-12);
  EXPECT_EQ(three[2], 1.0);
  EXPECT_EQ(adjusted_win_rates(std::vector<double>{0.3, 0.5}), (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(adjusted_win_rates(std::vector<double>{0.4, 0.4}), (std::vector<double>{0.5, 0.5}));
}

TEST(ScoreRows, WinRatesPerDatasetAndRepeat) {
  std::vector<ScoreRow> rows = {{"a", "m1", 0, 0.2, 0}, {"a", "m2", 0, 0.6, 0}, {"a", "m3", 0, 0.4, 0},
                                {"b", "m1", 0, 0.9, 0}, {"b", "m2", 0, 0.1, 0}};
  assign_win_rates(rows);
  EXPECT_EQ(rows[0].win_rate, 0.0);
  EXPECT_EQ(rows[1].win_rate, 1.0);
  EXPECT_DOUBLE_EQ(rows[2].win_rate, 0.5);
  EXPECT_EQ(rows[3].win_rate, 1.0);
  const std::string text = format_score_rows(rows);
  std::istringstream in(text);
  const auto back = parse_score_rows(parse_csv(in));
  ASSERT_EQ(back.size(), rows.size());
  EXPECT_EQ(back[2].method, "m3");
  EXPECT_DOUBLE_EQ(back[2].r2, 0.4);
}

TEST(Search, StandardSpaceSamplesValidHyperparams) {
  const auto space = SearchSpace::standard();
  EXPECT_NO_THROW(space.validate());
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto hp = sample_hyperparams(space, rng, 5);
    EXPECT_NO_THROW(hp.validate());
    EXPECT_NE(std::find(space.n_trees.begin(), space.n_trees.end(), hp.n_trees), space.n_trees.end());
  }
  SearchSpace empty = space;
  empty.alpha.clear();
  EXPECT_COLLAB_ERROR(empty.validate(), ErrorCategory::Config);
}

SearchSpace tiny_space() {
  SearchSpace s = SearchSpace::standard();
  s.n_estimators = {3};
  return s;
}

TEST(Search, SingleRoundReturnsSampledSet) {
  const RawTable train = y1_table(200, 4), val = y1_table(100, 5);
  TuneBudget budget;
  budget.rounds = 1;
  budget.space = tiny_space();
  const auto result = random_search_tune(train, val, y1_specs(), budget);
  ASSERT_EQ(result.trials.size(), 1u);
  EXPECT_EQ(result.best, result.trials[0].hyperparams);
}

TEST(Search, InjectedOptimumWins) {
  const RawTable train = y1_table(300, 6), val = y1_table(150, 7);
  TuneBudget budget;
  budget.rounds = 3;
  SearchSpace weak = tiny_space();
  weak.max_depth = {1};
  weak.n_trees = {1};
  budget.space = weak;
  Hyperparams strong;
  strong.n_estimators = 10;
  const std::vector<Hyperparams> injected = {strong};
  const auto result = random_search_tune(train, val, y1_specs(), budget, injected);
  ASSERT_EQ(result.trials.size(), 4u);
  EXPECT_EQ(result.best, strong);
}

// Records the order of row requests.
class AuditedSource : public RowSource {
 public:
  explicit AuditedSource(const RawTable& t) : table_(t) {}
  std::size_t num_rows() const override { return table_.num_rows(); }
  RawTable rows(const std::vector<std::size_t>& indices) const override {
    requests.push_back(indices);
    return table_.select_rows(indices);
  }
  mutable std::vector<std::vector<std::size_t>> requests;

 private:
  const RawTable& table_;
};

TEST(Protocol, TestRowsAreReadOnceAndLast) {
  const RawTable table = y1_table(400, 8);
  AuditedSource source(table);
  TuneBudget budget;
  budget.rounds = 2;
  budget.space = tiny_space();
  const auto result = run_protocol(source, y1_specs(), budget, 9);
  ASSERT_FALSE(source.requests.empty());
  const std::set<std::size_t> test(result.split.test.begin(), result.split.test.end());
  for (std::size_t r = 0; r + 1 < source.requests.size(); ++r) {
    for (std::size_t i : source.requests[r]) EXPECT_FALSE(test.count(i));
  }
  EXPECT_EQ(std::set<std::size_t>(source.requests.back().begin(), source.requests.back().end()), test);
  EXPECT_GT(result.test_r2, 0.2);
}

TEST(Protocol, TuningBeatsDefaults) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RawTable table = y1_table(500, 100 + seed);
    TuneBudget budget;
    budget.rounds = 20;
    budget.seed = seed;
    const double tuned = run_protocol(TableSource(table), y1_specs(), budget, seed).test_r2;
    TuneBudget fixed;
    fixed.rounds = 0;
    fixed.seed = seed;
    Hyperparams defaults;
    defaults.seed = seed;
    Rng rng(seed);
    const auto split = split_48_32_20(table.num_rows(), rng);
    std::vector<std::size_t> fit = split.train;
    fit.insert(fit.end(), split.validation.begin(), split.validation.end());
    const auto model = fit_table(table.select_rows(fit), y1_specs(), defaults);
    const RawTable test = table.select_rows(split.test);
    const double untuned = r2(predict_table(model, test), response_values(test, y1_specs()));
    wins += tuned >= untuned;
  }
  EXPECT_GE(wins, 15);
}

}  // namespace
}  // namespace collab
