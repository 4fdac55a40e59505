#include "collab/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "collab/dataset.hpp"
#include "collab/error.hpp"
#include "collab/xmdi.hpp"

namespace collab {

SplitIndices split_48_32_20(std::size_t n, Rng& rng) {
  if (n < 10) throw Error(ErrorCategory::Argument, "the split needs at least 10 rows");
  static constexpr std::size_t weights[] = {48, 32, 20};
  std::size_t sizes[3];
  std::size_t remainders[3];
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    sizes[k] = n * weights[k] / 100;
    remainders[k] = n * weights[k] % 100;
    assigned += sizes[k];
  }
  std::size_t order[] = {0, 1, 2};
  std::stable_sort(std::begin(order), std::end(order),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k]];

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(perm));
  SplitIndices out;
  auto first = perm.begin();
  out.train.assign(first, first + static_cast<std::ptrdiff_t>(sizes[0]));
  first += static_cast<std::ptrdiff_t>(sizes[0]);
  out.validation.assign(first, first + static_cast<std::ptrdiff_t>(sizes[1]));
  first += static_cast<std::ptrdiff_t>(sizes[1]);
  out.test.assign(first, perm.end());
  return out;
}

double r2(std::span<const double> predictions, std::span<const double> truth) {
  if (predictions.size() != truth.size()) throw Error(ErrorCategory::Metric, "prediction and truth lengths differ");
  if (truth.size() < 2) throw Error(ErrorCategory::Metric, "R2 needs at least two points");
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    sse += (truth[i] - predictions[i]) * (truth[i] - predictions[i]);
    sst += (truth[i] - mean) * (truth[i] - mean);
  }
  if (!(sst > 0.0)) throw Error(ErrorCategory::Metric, "truth has zero variance");
  return 1.0 - sse / sst;
}

std::vector<double> adjusted_win_rates(std::span<const double> scores) {
  if (scores.empty()) return {};
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size(), 0.5);
  if (*hi > *lo) {
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - *lo) / (*hi - *lo);
  }
  return out;
}

SearchSpace SearchSpace::standard() {
  SearchSpace s;
  s.n_estimators = {100};
  s.n_trees = {6, 7, 8, 9, 10, 11, 12};
  s.alpha = {0.001, 1, 10, 100, 10000, kInfinity};
  s.min_samples_split = {5, 10, 15, 20, 30};
  s.min_samples_leaf = {0, 5, 10, 15, 20, 30};
  s.n_bins = {5, 7, 10, 15, 20, 40};
  s.random_update = {0, 0.0001, 0.001, 0.01, 0.1, 1};
  s.max_depth = {3, 5, 10, 20, 30, kUnlimitedDepth};
  return s;
}

void SearchSpace::validate() const {
  if (n_estimators.empty() || n_trees.empty() || alpha.empty() || min_samples_split.empty() ||
      min_samples_leaf.empty() || n_bins.empty() || random_update.empty() || max_depth.empty()) {
    throw Error(ErrorCategory::Config, "every search-space field needs at least one value");
  }
}

Hyperparams sample_hyperparams(const SearchSpace& space, Rng& rng, std::uint64_t seed) {
  space.validate();
  auto pick = [&rng](const auto& values) { return values[rng.index(values.size())]; };
  Hyperparams hp;
  hp.n_estimators = pick(space.n_estimators);
  hp.n_trees = pick(space.n_trees);
  hp.alpha = pick(space.alpha);
  hp.min_samples_split = pick(space.min_samples_split);
  hp.min_samples_leaf = pick(space.min_samples_leaf);
  hp.n_bins = pick(space.n_bins);
  hp.random_update = pick(space.random_update);
  hp.max_depth = pick(space.max_depth);
  hp.seed = seed;
  return hp;
}

EnsembleModel fit_table(const RawTable& table, std::span<const ColumnSpec> specs, const Hyperparams& hp,
                        std::size_t threads) {
  hp.validate();
  const FeatureSchema schema = build_schema(table, specs, hp.n_bins);
  const EncodedDataset data = encode(table, schema);
  return grow_ensemble(data, schema, hp, threads);
}

std::vector<double> predict_table(const EnsembleModel& model, const RawTable& table) {
  return model.predict(encode_features(table, model.schema));
}

std::vector<double> response_values(const RawTable& table, std::span<const ColumnSpec> specs) {
  auto it = std::find_if(specs.begin(), specs.end(), [](const auto& s) { return s.role == ColumnRole::Response; });
  if (it == specs.end()) throw Error(ErrorCategory::Config, "no response column is annotated");
  const std::size_t col = table.column_index(it->name);
  std::vector<double> y;
  y.reserve(table.num_rows());
  for (std::size_t i = 0; i < table.num_rows(); ++i) {
    auto v = parse_number(table.rows[i][col]);
    if (!v) throw Error(ErrorCategory::Encode, "response row " + std::to_string(i + 1) + " is not numeric");
    y.push_back(*v);
  }
  return y;
}

TuneResult evaluate_candidates(const RawTable& train, const RawTable& validation, std::span<const ColumnSpec> specs,
                               std::span<const Hyperparams> candidates, std::size_t threads) {
  if (candidates.empty()) throw Error(ErrorCategory::Config, "no candidates to evaluate");
  const auto truth = response_values(validation, specs);
  TuneResult result;
  for (const auto& hp : candidates) {
    const EnsembleModel model = fit_table(train, specs, hp, threads);
    const double score = r2(predict_table(model, validation), truth);
    result.trials.push_back({hp, score});
    if (result.trials.size() == 1 || score > result.best_r2) {
      result.best = hp;
      result.best_r2 = score;
    }
  }
  return result;
}

TuneResult random_search_tune(const RawTable& train, const RawTable& validation, std::span<const ColumnSpec> specs,
                              const TuneBudget& budget, std::span<const Hyperparams> injected) {
  if (budget.rounds == 0 && injected.empty()) throw Error(ErrorCategory::Config, "tuning needs at least one round");
  Rng rng = Rng::derive(budget.seed, 0x7475);
  std::vector<Hyperparams> pool;
  for (std::size_t r = 0; r < budget.rounds; ++r) pool.push_back(sample_hyperparams(budget.space, rng, budget.seed));
  pool.insert(pool.end(), injected.begin(), injected.end());
  return evaluate_candidates(train, validation, specs, pool, budget.threads);
}

ProtocolResult run_protocol(const RowSource& data, std::span<const ColumnSpec> specs, const TuneBudget& budget,
                            std::uint64_t split_seed) {
  ProtocolResult result;
  Rng rng(split_seed);
  result.split = split_48_32_20(data.num_rows(), rng);
  const RawTable train = data.rows(result.split.train);
  const RawTable validation = data.rows(result.split.validation);
  result.tune = random_search_tune(train, validation, specs, budget);

  std::vector<std::size_t> pooled = result.split.train;
  pooled.insert(pooled.end(), result.split.validation.begin(), result.split.validation.end());
  const EnsembleModel final_model = fit_table(data.rows(pooled), specs, result.tune.best, budget.threads);

  const RawTable test = data.rows(result.split.test);
  result.test_r2 = r2(predict_table(final_model, test), response_values(test, specs));
  return result;
}

void assign_win_rates(std::vector<ScoreRow>& rows) {
  std::map<std::pair<std::string, std::size_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < rows.size(); ++i) groups[{rows[i].dataset, rows[i].repeat}].push_back(i);
  for (const auto& [key, members] : groups) {
    std::vector<double> scores;
    for (std::size_t i : members) scores.push_back(rows[i].r2);
    const auto rates = adjusted_win_rates(scores);
    for (std::size_t j = 0; j < members.size(); ++j) rows[members[j]].win_rate = rates[j];
  }
}

std::vector<ScoreRow> parse_score_rows(const RawTable& table) {
  const std::size_t cd = table.column_index("dataset");
  const std::size_t cm = table.column_index("method");
  const std::size_t cr = table.column_index("repeat");
  const std::size_t cs = table.column_index("r2");
  std::vector<ScoreRow> rows;
  for (std::size_t i = 0; i < table.num_rows(); ++i) {
    const auto& cells = table.rows[i];
    auto repeat = parse_number(cells[cr]);
    auto score = parse_number(cells[cs]);
    if (!repeat || !score || *repeat < 0 || std::floor(*repeat) != *repeat) {
      throw Error(ErrorCategory::Schema, "score row " + std::to_string(i + 1) + " needs an integer repeat and numeric r2");
    }
    rows.push_back({cells[cd], cells[cm], static_cast<std::size_t>(*repeat), *score, 0.0});
  }
  return rows;
}

std::string format_score_rows(std::span<const ScoreRow> rows) {
  std::ostringstream out;
  out << "dataset,method,repeat,r2,win_rate\n";
  for (const auto& r : rows) {
    out << r.dataset << ',' << r.method << ',' << r.repeat << ',' << format_number(r.r2) << ','
        << format_number(r.win_rate) << '\n';
  }
  return out.str();
}

}  // namespace collab
