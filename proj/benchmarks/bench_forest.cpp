#include <benchmark/benchmark.h>

#include "collab/datagen.hpp"
#include "collab/forest.hpp"
#include "collab/xmdi.hpp"

namespace {

collab::FeatureSchema continuous_schema(std::size_t p) {
  collab::FeatureSchema schema;
  for (std::size_t j = 0; j < p; ++j) {
    schema.groups.push_back({"x" + std::to_string(j + 1), collab::GroupKind::ContinuousSingle, {j}, {}, {}});
  }
  schema.num_features = p;
  return schema;
}

void BM_GrowMember(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t p = 10;
  collab::Rng rng(3);
  const collab::Matrix x = collab::gaussian_copula_ar1(n, p, 0.1, rng);
  const auto y = collab::model_y1(x, rng);
  const auto data = collab::make_dataset(x, y);
  const auto schema = continuous_schema(p);
  collab::Hyperparams hp;
  hp.n_trees = 10;
  for (auto _ : state) {
    collab::Rng member(7);
    benchmark::DoNotOptimize(collab::grow(data, schema, hp, member));
  }
}
BENCHMARK(BM_GrowMember)->Arg(500)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_ComputeXmdi(benchmark::State& state) {
  const std::size_t p = 10;
  collab::Rng rng(4);
  const collab::Matrix x = collab::gaussian_copula_ar1(4000, p, 0.1, rng);
  const auto y = collab::model_y1(x, rng);
  collab::Hyperparams hp;
  collab::Rng member(5);
  const auto model = collab::grow(collab::make_dataset(x, y), continuous_schema(p), hp, member);
  for (auto _ : state) benchmark::DoNotOptimize(collab::compute_xmdi(model));
  state.counters["rounds"] = static_cast<double>(model.split_log.size());
}
BENCHMARK(BM_ComputeXmdi);

}  // namespace

BENCHMARK_MAIN();
