#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "collab/dataset.hpp"
#include "collab/random.hpp"
#include "collab/schema.hpp"

namespace collab {

using RowIndex = std::uint32_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// One region constraint: x[feature] > threshold, or x[feature] <= threshold.
/// A one-hot child is `x[j] > 0`.
struct Constraint {
  enum class Op : std::uint8_t { Greater, LessEqual };

  std::size_t feature = 0;
  Op op = Op::Greater;
  double threshold = 0.0;

  bool holds(std::span<const double> row) const {
    return op == Op::Greater ? row[feature] > threshold : row[feature] <= threshold;
  }
  bool operator==(const Constraint&) const = default;
};

/// Per-dataset lookup tables for split scoring. Multi-feature groups map each
/// row to the index of its hot column; single-feature groups map each row to
/// the rank of its value among the distinct values of that column.
class SplitIndex {
 public:
  SplitIndex(const Matrix& x, const FeatureSchema& schema);

  std::size_t num_groups() const { return groups_.size(); }
  bool is_multi(std::size_t group) const { return groups_[group].multi; }
  std::size_t num_levels(std::size_t group) const { return groups_[group].levels; }
  std::uint32_t code(std::size_t group, RowIndex row) const { return groups_[group].codes[row]; }
  std::span<const std::uint32_t> codes(std::size_t group) const { return groups_[group].codes; }
  /// Distinct values of a single-feature group, ascending.
  double value_of_rank(std::size_t group, std::uint32_t rank) const { return groups_[group].values[rank]; }

 private:
  struct GroupTable {
    bool multi = false;
    std::size_t levels = 0;
    std::vector<std::uint32_t> codes;
    std::vector<double> values;
  };
  std::vector<GroupTable> groups_;
};

/// Reusable buffers so scoring does not allocate per call.
struct ScoreScratch {
  std::vector<double> sums;
  std::vector<std::uint32_t> counts;
  std::vector<std::pair<std::uint32_t, RowIndex>> ranked;
};

/// Split score of a node on a multi-feature group: the residual sum of squares
/// removed by replacing each one-hot child's residuals with their mean.
/// Empty children contribute nothing.
double split_score_group(const SplitIndex& index, std::size_t group, std::span<const double> residuals,
                         std::span<const RowIndex> rows, ScoreScratch& scratch);

struct SingleSplit {
  double score = 0.0;
  std::uint32_t cut_rank = 0;
  double cut = 0.0;  // children are {x > cut} and {x <= cut}
};

/// Best two-way cut of a node on a single-feature group. Candidate cuts are
/// the node's observed values; among equal maxima the smallest cut wins.
SingleSplit split_score_single(const SplitIndex& index, std::size_t group, std::span<const double> residuals,
                               std::span<const RowIndex> rows, ScoreScratch& scratch);

/// Same result as split_score_single for rows already ordered by the
/// group's value (ties in any order).
SingleSplit split_score_sorted(const SplitIndex& index, std::size_t group, std::span<const double> residuals,
                               std::span<const RowIndex> sorted_rows);

/// Priority class used by the update penalty: roots, depth-one sets, deeper.
inline std::size_t priority_class(std::size_t depth) { return depth < 2 ? depth : 2; }

/// Update penalty for a candidate set: +inf when the update list holds a set
/// of a strictly higher priority class, 0 otherwise.
double penalty(std::span<const std::size_t> update_list_depths, std::size_t candidate_depth);

/// Picks an index from penalized scores (-inf marks a penalized candidate).
/// alpha = +inf takes an argmax with uniform random tie-breaking; a finite
/// alpha samples from softmax(alpha * scores).
std::size_t select_update(std::span<const double> penalized_scores, double alpha, Rng& rng);

/// Softmax weights as used by select_update, normalized to sum to one.
std::vector<double> update_probabilities(std::span<const double> penalized_scores, double alpha);

}  // namespace collab
