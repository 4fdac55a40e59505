#include <benchmark/benchmark.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "collab/datagen.hpp"
#include "collab/splitter.hpp"

namespace {

collab::FeatureSchema one_column_schema() {
  collab::FeatureSchema schema;
  schema.groups.push_back({"x1", collab::GroupKind::ContinuousSingle, {0}, {}, {}});
  schema.num_features = 1;
  return schema;
}

void BM_SplitScoreSingle(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  collab::Rng rng(1);
  const collab::Matrix x = collab::gaussian_copula_ar1(n, 1, 0.0, rng);
  std::vector<double> residuals(n);
  for (double& r : residuals) r = rng.normal();
  const collab::SplitIndex index(x, one_column_schema());
  std::vector<collab::RowIndex> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  collab::ScoreScratch scratch;
  for (auto _ : state) {
    benchmark::DoNotOptimize(collab::split_score_single(index, 0, residuals, rows, scratch));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_SplitScoreSingle)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_SplitScoreSorted(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  collab::Rng rng(1);
  const collab::Matrix x = collab::gaussian_copula_ar1(n, 1, 0.0, rng);
  std::vector<double> residuals(n);
  for (double& r : residuals) r = rng.normal();
  const collab::SplitIndex index(x, one_column_schema());
  std::vector<collab::RowIndex> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  std::sort(rows.begin(), rows.end(), [&](auto a, auto b) { return index.code(0, a) < index.code(0, b); });
  for (auto _ : state) {
    benchmark::DoNotOptimize(collab::split_score_sorted(index, 0, residuals, rows));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_SplitScoreSorted)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_SplitScoreGroup(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t levels = 10;
  collab::Rng rng(2);
  collab::Matrix x(n, levels);
  for (std::size_t i = 0; i < n; ++i) x(i, rng.index(levels)) = 1.0;
  std::vector<double> residuals(n);
  for (double& r : residuals) r = rng.normal();
  collab::FeatureSchema schema;
  collab::GroupSpec g{"block", collab::GroupKind::CategoricalOneHot, {}, {}, {}};
  for (std::size_t j = 0; j < levels; ++j) g.columns.push_back(j);
  schema.groups.push_back(g);
  schema.num_multi = 1;
  schema.num_features = levels;
  const collab::SplitIndex index(x, schema);
  std::vector<collab::RowIndex> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  collab::ScoreScratch scratch;
  for (auto _ : state) {
    benchmark::DoNotOptimize(collab::split_score_group(index, 0, residuals, rows, scratch));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_SplitScoreGroup)->Arg(1000)->Arg(10000)->Arg(100000);

}  // namespace
