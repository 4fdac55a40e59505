#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "collab/forest.hpp"
#include "collab/schema.hpp"
#include "collab/table.hpp"

namespace collab {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

/// Uniform random 48/32/20 partition; sizes use largest-remainder rounding.
SplitIndices split_48_32_20(std::size_t n, Rng& rng);

/// 1 - SSE/SST. Throws Metric for mismatched lengths, n < 2 or constant truth.
double r2(std::span<const double> predictions, std::span<const double> truth);

/// (score - min) / (max - min) per method; 0.5 each when all scores agree.
std::vector<double> adjusted_win_rates(std::span<const double> scores);

/// Discrete value sets sampled uniformly and independently per field.
/// An empty n_bins entry means continuous columns stay unbinned.
struct SearchSpace {
  std::vector<std::size_t> n_estimators;
  std::vector<std::size_t> n_trees;
  std::vector<double> alpha;
  std::vector<std::size_t> min_samples_split;
  std::vector<std::size_t> min_samples_leaf;
  std::vector<std::optional<int>> n_bins;
  std::vector<double> random_update;
  std::vector<std::size_t> max_depth;

  /// The standard tuning space for the ensemble.
  static SearchSpace standard();
  void validate() const;  // throws Config on an empty value set
};

Hyperparams sample_hyperparams(const SearchSpace& space, Rng& rng, std::uint64_t seed);

struct TuneBudget {
  std::size_t rounds = 20;
  SearchSpace space = SearchSpace::standard();
  std::uint64_t seed = 42;
  std::size_t threads = 1;
};

struct TuneTrial {
  Hyperparams hyperparams;
  double validation_r2 = 0.0;
};

struct TuneResult {
  Hyperparams best;
  double best_r2 = 0.0;
  std::vector<TuneTrial> trials;
};

/// Builds the schema (binning per hp.n_bins) on `table` and grows an ensemble.
EnsembleModel fit_table(const RawTable& table, std::span<const ColumnSpec> specs, const Hyperparams& hp,
                        std::size_t threads = 1);

/// Predictions for every row of `table` (the response column is ignored).
std::vector<double> predict_table(const EnsembleModel& model, const RawTable& table);

/// Response column of `table` as numbers; throws Encode on missing values.
std::vector<double> response_values(const RawTable& table, std::span<const ColumnSpec> specs);

/// Scores each candidate on validation R2 and keeps the first best.
TuneResult evaluate_candidates(const RawTable& train, const RawTable& validation, std::span<const ColumnSpec> specs,
                               std::span<const Hyperparams> candidates, std::size_t threads = 1);

/// Samples budget.rounds candidates, appends `injected`, and evaluates them.
TuneResult random_search_tune(const RawTable& train, const RawTable& validation, std::span<const ColumnSpec> specs,
                              const TuneBudget& budget, std::span<const Hyperparams> injected = {});

/// Row access used by the protocol, so callers can audit which rows are read
/// and when.
class RowSource {
 public:
  virtual ~RowSource() = default;
  virtual std::size_t num_rows() const = 0;
  virtual RawTable rows(const std::vector<std::size_t>& indices) const = 0;
};

class TableSource : public RowSource {
 public:
  explicit TableSource(const RawTable& table) : table_(table) {}
  std::size_t num_rows() const override { return table_.num_rows(); }
  RawTable rows(const std::vector<std::size_t>& indices) const override { return table_.select_rows(indices); }

 private:
  const RawTable& table_;
};

struct ProtocolResult {
  SplitIndices split;
  TuneResult tune;
  double test_r2 = 0.0;
};

/// Split, tune on train/validation, refit on their union, then score the
/// test rows once.
ProtocolResult run_protocol(const RowSource& data, std::span<const ColumnSpec> specs, const TuneBudget& budget,
                            std::uint64_t split_seed);

struct ScoreRow {
  std::string dataset;
  std::string method;
  std::size_t repeat = 0;
  double r2 = 0.0;
  double win_rate = 0.0;
};

/// Fills win_rate within each (dataset, repeat) group. Groups with a single
/// method get 0.5.
void assign_win_rates(std::vector<ScoreRow>& rows);

std::vector<ScoreRow> parse_score_rows(const RawTable& table);
std::string format_score_rows(std::span<const ScoreRow> rows);

}  // namespace collab
