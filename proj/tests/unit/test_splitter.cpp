#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "collab/oracle.hpp"
#include "collab/splitter.hpp"
#include "test_util.hpp"

namespace collab {
namespace {

std::vector<RowIndex> all_rows(std::size_t n) {
  std::vector<RowIndex> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  return rows;
}

Matrix column(const std::vector<double>& v) {
  Matrix x(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) x(i, 0) = v[i];
  return x;
}

TEST(SplitScoreGroup, TwoChildren) {
  Matrix x(4, 2);
  x(0, 0) = x(1, 0) = 1.0;
  x(2, 1) = x(3, 1) = 1.0;
  const auto schema = test::mixed_schema({2}, 0);
  const SplitIndex index(x, schema);
  const std::vector<double> r = {1, 3, 5, 7};
  ScoreScratch scratch;
  EXPECT_DOUBLE_EQ(split_score_group(index, 0, r, all_rows(4), scratch), 80.0);
}

TEST(SplitScoreGroup, ZeroResidualsAndEmptyChild) {
  Matrix x(4, 2);
  for (std::size_t i = 0; i < 4; ++i) x(i, 0) = 1.0;
  const SplitIndex index(x, test::mixed_schema({2}, 0));
  ScoreScratch scratch;
  EXPECT_EQ(split_score_group(index, 0, std::vector<double>(4, 0.0), all_rows(4), scratch), 0.0);
  EXPECT_EQ(split_score_group(index, 0, std::vector<double>{-3, -1, 1, 3}, all_rows(4), scratch), 0.0);
}

TEST(SplitScoreSingle, BinaryColumn) {
  const Matrix x = column({0, 0, 1, 1});
  const SplitIndex index(x, test::single_schema(1, GroupKind::BinarySingle));
  ScoreScratch scratch;
  const auto s = split_score_single(index, 0, std::vector<double>{-3, -1, 1, 3}, all_rows(4), scratch);
  EXPECT_DOUBLE_EQ(s.score, 16.0);
  EXPECT_EQ(s.cut, 0.0);
}

TEST(SplitScoreSingle, ConstantColumnScoresNothing) {
  const Matrix x = column({2, 2, 2, 2});
  const SplitIndex index(x, test::single_schema(1, GroupKind::ContinuousSingle));
  ScoreScratch scratch;
  EXPECT_EQ(split_score_single(index, 0, std::vector<double>{-3, -1, 1, 3}, all_rows(4), scratch).score, 0.0);
}

TEST(SplitScoreSingle, ContinuousColumnUsesTotalSquares) {
  const Matrix x = column({1, 2, 3, 4});
  const SplitIndex index(x, test::single_schema(1, GroupKind::ContinuousSingle));
  ScoreScratch scratch;
  // Uncentered residuals: both children pure, so the score is the full sum of squares.
  const auto raw = split_score_single(index, 0, std::vector<double>{1, 1, 5, 5}, all_rows(4), scratch);
  EXPECT_DOUBLE_EQ(raw.score, 52.0);
  EXPECT_EQ(raw.cut, 2.0);
  // Centered residuals give the variance reduction.
  const auto centered = split_score_single(index, 0, std::vector<double>{-2, -2, 2, 2}, all_rows(4), scratch);
  EXPECT_DOUBLE_EQ(centered.score, 16.0);
  EXPECT_EQ(centered.cut, 2.0);
}

TEST(SplitScoreSingle, SmallestCutWinsTies) {
  const Matrix x = column({1, 2, 3});
  const SplitIndex index(x, test::single_schema(1, GroupKind::ContinuousSingle));
  ScoreScratch scratch;
  // Cuts at 1 and 2 both isolate a zero-residual row.
  const auto s = split_score_single(index, 0, std::vector<double>{0, 2, 0}, all_rows(3), scratch);
  EXPECT_EQ(s.cut, 1.0);
}

TEST(SplitScore, MatchesBruteForceOnRandomInstances) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(12);
    const std::size_t w = 2 + rng.index(3);
    Matrix x(n, w + 2);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      x(i, rng.index(w)) = 1.0;
      x(i, w) = static_cast<double>(rng.index(2));
      x(i, w + 1) = std::floor(rng.uniform() * 5.0);
      r[i] = rng.normal();
    }
    auto schema = test::mixed_schema({w}, 2);
    const SplitIndex index(x, schema);
    std::vector<RowIndex> rows;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.uniform() < 0.75) rows.push_back(static_cast<RowIndex>(i));
    }
    ScoreScratch scratch;
    EXPECT_NEAR(split_score_group(index, 0, r, rows, scratch),
                brute_force_split_score(r, x, rows, schema.groups[0].columns), 1e-9);
    for (std::size_t g = 1; g < 3; ++g) {
      EXPECT_NEAR(split_score_single(index, g, r, rows, scratch).score,
                  brute_force_split_score(r, x, rows, schema.groups[g].columns), 1e-9);
    }
  }
}

TEST(SplitScore, SortedScanAgreesWithHistogram) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.index(300);
    Matrix x(n, 1);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      x(i, 0) = std::floor(rng.uniform() * 40.0);
      r[i] = rng.normal();
    }
    const SplitIndex index(x, test::single_schema(1, GroupKind::ContinuousSingle));
    auto rows = all_rows(n);
    ScoreScratch scratch;
    const auto a = split_score_single(index, 0, r, rows, scratch);
    std::stable_sort(rows.begin(), rows.end(), [&](auto i, auto j) { return index.code(0, i) < index.code(0, j); });
    const auto b = split_score_sorted(index, 0, r, rows);
    EXPECT_NEAR(a.score, b.score, 1e-9);
    EXPECT_EQ(a.cut, b.cut);
  }
}

TEST(SplitScore, ScaleEquivariant) {
  Rng rng(8);
  const std::size_t n = 40;
  Matrix x(n, 1);
  std::vector<double> r(n), scaled(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform();
    r[i] = rng.normal();
    scaled[i] = 3.0 * r[i];
  }
  const SplitIndex index(x, test::single_schema(1, GroupKind::ContinuousSingle));
  ScoreScratch scratch;
  const auto a = split_score_single(index, 0, r, all_rows(n), scratch);
  const auto b = split_score_single(index, 0, scaled, all_rows(n), scratch);
  EXPECT_NEAR(b.score, 9.0 * a.score, 1e-9 * b.score);
  EXPECT_EQ(a.cut, b.cut);
}

TEST(Penalty, PriorityClasses) {
  EXPECT_EQ(penalty(std::vector<std::size_t>{0, 1}, 1), kInfinity);
  EXPECT_EQ(penalty(std::vector<std::size_t>{0}, 0), 0.0);
  EXPECT_EQ(penalty(std::vector<std::size_t>{1, 3}, 3), kInfinity);
  EXPECT_EQ(penalty(std::vector<std::size_t>{2, 5}, 5), 0.0);
}

TEST(SelectUpdate, ArgmaxTiesSplitEvenly) {
  Rng rng(3);
  const std::vector<double> scores = {5.0, 5.0};
  int first = 0;
  for (int i = 0; i < 10000; ++i) first += select_update(scores, kInfinity, rng) == 0;
  EXPECT_NEAR(first / 10000.0, 0.5, 0.05);
}

TEST(SelectUpdate, SoftmaxProbabilities) {
  const auto p = update_probabilities(std::vector<double>{1.0, 2.0}, 0.001);
  const double e = std::exp(0.001);
  EXPECT_NEAR(p[0], 1.0 / (1.0 + e), 1e-12);
  EXPECT_NEAR(p[0], 0.49975, 1e-6);
  EXPECT_NEAR(p[1], 0.50025, 1e-6);
}

TEST(SelectUpdate, PenalizedCandidateNeverChosen) {
  Rng rng(4);
  const std::vector<double> scores = {1.0, 2.0, -kInfinity};
  for (int i = 0; i < 10000; ++i) EXPECT_NE(select_update(scores, 10.0, rng), 2u);
  EXPECT_COLLAB_ERROR(select_update(std::vector<double>{-kInfinity}, 1.0, rng), ErrorCategory::Internal);
}

}  // namespace
}  // namespace collab
