#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "collab/dataset.hpp"
#include "collab/random.hpp"
#include "collab/schema.hpp"
#include "collab/splitter.hpp"

namespace collab {

inline constexpr std::size_t kUnlimitedDepth = std::numeric_limits<std::size_t>::max();

struct Hyperparams {
  std::size_t n_estimators = 100;  // bagging members
  std::size_t n_trees = 10;        // collaborative trees per member
  double alpha = kInfinity;        // softmax weight; +inf means argmax
  std::size_t min_samples_split = 5;
  std::size_t min_samples_leaf = 5;
  std::optional<int> n_bins;       // consumed when building the schema
  double random_update = 1.0;      // fraction of the update list scored after 2K rounds
  std::size_t max_depth = kUnlimitedDepth;
  std::uint64_t seed = 42;

  void validate() const;  // throws Config
  bool operator==(const Hyperparams&) const = default;
};

struct TreeNode {
  std::int32_t parent = -1;
  Constraint constraint;  // unused for the root
  double increment = 0.0;
  std::uint32_t depth = 0;
  std::vector<std::int32_t> children;
};

/// An additive tree: the prediction is the sum of increments on the path of
/// nodes whose constraints hold, starting at the root.
struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> row) const;
  /// Conjunction of constraints from the root down to `node`.
  std::vector<Constraint> region(std::size_t node) const;
};

/// One completed update round.
struct RoundRecord {
  std::size_t round = 0;  // 1-based
  std::size_t tree = 0;
  std::size_t group = 0;
  std::optional<std::size_t> parent_round;  // round that created the parent node; none for roots
  double impurity_drop = 0.0;  // decrease of the training SSE in this round
  std::size_t nodes_updated = 0;
  std::size_t depth = 0;  // depth of the updated nodes
};

using SplitLog = std::vector<RoundRecord>;

struct CollabTreesModel {
  std::vector<Tree> trees;
  SplitLog split_log;
  double y_mean = 0.0;
  std::size_t n_train = 0;
  std::size_t num_groups = 0;
  double initial_sse = 0.0;
  double final_sse = 0.0;

  double predict(std::span<const double> row) const;
};

struct EnsembleModel {
  FeatureSchema schema;
  Hyperparams hyperparams;
  std::vector<CollabTreesModel> models;
  std::vector<std::vector<std::size_t>> bootstrap;
  double response_variance = 0.0;  // of the training response, 1/n normalization

  double predict(std::span<const double> row) const;
  std::vector<double> predict(const Matrix& x) const;
};

bool node_valid_for_split(std::size_t size, std::size_t depth, const Hyperparams& hp);

/// Children that receive a tree increment: those larger than
/// min_samples_leaf when there are at least two of them, otherwise none.
std::vector<std::size_t> children_valid_for_update(std::span<const std::size_t> child_sizes, const Hyperparams& hp);

/// Grows K collaborative trees on `data`. The response is re-centered on this
/// sample; the model's y_mean restores the original scale.
CollabTreesModel grow(const EncodedDataset& data, const FeatureSchema& schema, const Hyperparams& hp, Rng& rng);

/// Bagging: member b trains on a size-n bootstrap drawn from Rng::derive(seed, b).
/// Output does not depend on `threads`.
EnsembleModel grow_ensemble(const EncodedDataset& data, const FeatureSchema& schema, const Hyperparams& hp,
                            std::size_t threads = 1);

}  // namespace collab
