#include "collab/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "collab/error.hpp"

namespace collab {

void Hyperparams::validate() const {
  if (n_trees < 1) throw Error(ErrorCategory::Config, "n_trees must be at least 1");
  if (n_estimators < 1) throw Error(ErrorCategory::Config, "n_estimators must be at least 1");
  if (!(alpha >= 0.0)) throw Error(ErrorCategory::Config, "alpha must be nonnegative");
  if (!(random_update >= 0.0 && random_update <= 1.0)) {
    throw Error(ErrorCategory::Config, "random_update must lie in [0, 1]");
  }
  if (n_bins && *n_bins < 2) throw Error(ErrorCategory::Config, "n_bins must be at least 2");
}

double Tree::predict(std::span<const double> row) const {
  double total = 0.0;
  std::size_t at = 0;
  for (;;) {
    const TreeNode& node = nodes[at];
    total += node.increment;
    std::int32_t next = -1;
    for (std::int32_t child : node.children) {
      if (nodes[static_cast<std::size_t>(child)].constraint.holds(row)) {
        next = child;
        break;
      }
    }
    if (next < 0) return total;
    at = static_cast<std::size_t>(next);
  }
}

std::vector<Constraint> Tree::region(std::size_t node) const {
  std::vector<Constraint> out;
  for (auto at = static_cast<std::int32_t>(node); at > 0; at = nodes[static_cast<std::size_t>(at)].parent) {
    out.push_back(nodes[static_cast<std::size_t>(at)].constraint);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

double CollabTreesModel::predict(std::span<const double> row) const {
  double total = 0.0;
  for (const auto& tree : trees) total += tree.predict(row);
  return total + y_mean;
}

double EnsembleModel::predict(std::span<const double> row) const {
  if (models.empty()) throw Error(ErrorCategory::Prediction, "ensemble has no members");
  double total = 0.0;
  for (const auto& model : models) total += model.predict(row);
  return total / static_cast<double>(models.size());
}

std::vector<double> EnsembleModel::predict(const Matrix& x) const {
  if (x.cols() != schema.num_features) {
    throw Error(ErrorCategory::Prediction, "query has " + std::to_string(x.cols()) + " encoded columns, model expects " +
                                               std::to_string(schema.num_features));
  }
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i));
  return out;
}

bool node_valid_for_split(std::size_t size, std::size_t depth, const Hyperparams& hp) {
  return depth < hp.max_depth && size > std::max(hp.min_samples_split, hp.min_samples_leaf);
}

std::vector<std::size_t> children_valid_for_update(std::span<const std::size_t> child_sizes, const Hyperparams& hp) {
  std::vector<std::size_t> valid;
  for (std::size_t j = 0; j < child_sizes.size(); ++j) {
    if (child_sizes[j] > hp.min_samples_leaf) valid.push_back(j);
  }
  if (valid.size() < 2) valid.clear();
  return valid;
}

namespace {

// Single-feature groups with more distinct values than this keep per-node
// row orders sorted by value instead of being histogrammed on every rescore.
constexpr std::size_t kHistogramLevels = 64;

// Runs the update loop for one member. Split scores are cached per node and
// recomputed only after a round changes the residual of a row in the node.
class Grower {
 public:
  Grower(const EncodedDataset& data, const FeatureSchema& schema, const Hyperparams& hp, Rng& rng)
      : schema_(schema), hp_(hp), rng_(rng), index_(data.x, schema), num_groups_(schema.num_groups()) {
    const std::size_t n = data.n();
    if (n < 2) throw Error(ErrorCategory::Training, "training needs at least two rows");
    if (data.p() != schema.num_features) {
      throw Error(ErrorCategory::Training, "dataset width does not match the schema");
    }
    model_.n_train = n;
    model_.num_groups = num_groups_;
    const double mean = std::accumulate(data.y.begin(), data.y.end(), 0.0) / static_cast<double>(n);
    model_.y_mean = data.y_mean + mean;
    residual_.resize(n);
    for (std::size_t i = 0; i < n; ++i) residual_[i] = data.y[i] - mean;
    for (double r : residual_) model_.initial_sse += r * r;

    std::vector<RowIndex> all(n);
    std::iota(all.begin(), all.end(), RowIndex{0});
    slot_.assign(num_groups_, -1);
    std::vector<std::vector<RowIndex>> root_sorted;
    for (std::size_t m = 0; m < num_groups_; ++m) {
      if (index_.is_multi(m) || index_.num_levels(m) <= kHistogramLevels) continue;
      slot_[m] = static_cast<std::int32_t>(root_sorted.size());
      auto codes = index_.codes(m);
      auto& order = root_sorted.emplace_back(all);
      std::stable_sort(order.begin(), order.end(), [&](RowIndex a, RowIndex b) { return codes[a] < codes[b]; });
    }

    const std::size_t k = hp.n_trees;
    model_.trees.resize(k);
    row_node_.assign(k, std::vector<std::int32_t>(n, -1));
    child_of_.assign(n, 0);
    for (std::size_t t = 0; t < k; ++t) {
      model_.trees[t].nodes.emplace_back();
      if (!node_valid_for_split(n, 0, hp)) continue;
      NodeState node;
      node.tree_node = 0;
      node.rows = all;
      node.sorted = root_sorted;
      add_set(t, 0, std::nullopt, {std::move(node)});
    }
  }

  CollabTreesModel run() {
    std::vector<std::size_t> candidates;
    std::vector<double> flat;
    while (!active_.empty()) {
      choose_candidates(candidates);
      std::size_t min_class = 2;
      for (std::size_t c : candidates) {
        if (sets_[c].dirty) rescore(sets_[c]);
        min_class = std::min(min_class, priority_class(sets_[c].depth));
      }
      auto [set_id, group] = pick(candidates, min_class, flat);
      apply(set_id, group);
    }
    model_.final_sse = 0.0;
    for (double r : residual_) model_.final_sse += r * r;
    return std::move(model_);
  }

 private:
  struct NodeState {
    std::int32_t tree_node = 0;
    std::size_t set = 0;
    std::vector<RowIndex> rows;
    std::vector<std::vector<RowIndex>> sorted;  // per sorted slot, rows ordered by value
    std::vector<double> scores;                 // per group
    std::vector<std::uint32_t> cut_ranks;       // per group, single-feature groups only
    bool dirty = true;
  };

  struct SetState {
    std::size_t tree = 0;
    std::size_t depth = 0;
    std::optional<std::size_t> parent_round;
    std::vector<std::size_t> nodes;  // ids into nodes_
    std::vector<double> scores;      // per group, summed over nodes
    double best = 0.0;
    bool dirty = true;
  };

  void add_set(std::size_t tree, std::size_t depth, std::optional<std::size_t> parent_round,
               std::vector<NodeState> members) {
    const std::size_t id = sets_.size();
    SetState set;
    set.tree = tree;
    set.depth = depth;
    set.parent_round = parent_round;
    for (auto& node : members) {
      const auto node_id = static_cast<std::int32_t>(nodes_.size());
      node.set = id;
      for (RowIndex i : node.rows) row_node_[tree][i] = node_id;
      set.nodes.push_back(nodes_.size());
      nodes_.push_back(std::move(node));
    }
    sets_.push_back(std::move(set));
    active_.push_back(id);
  }

  void rescore(SetState& set) {
    set.scores.assign(num_groups_, 0.0);
    for (std::size_t id : set.nodes) {
      NodeState& node = nodes_[id];
      if (node.dirty) score_node(node);
      for (std::size_t m = 0; m < num_groups_; ++m) set.scores[m] += node.scores[m];
    }
    set.best = *std::max_element(set.scores.begin(), set.scores.end());
    set.dirty = false;
  }

  void score_node(NodeState& node) {
    node.scores.resize(num_groups_);
    node.cut_ranks.resize(num_groups_);
    for (std::size_t m = 0; m < num_groups_; ++m) {
      if (index_.is_multi(m)) {
        node.scores[m] = split_score_group(index_, m, residual_, node.rows, scratch_);
        continue;
      }
      const SingleSplit split =
          slot_[m] >= 0 ? split_score_sorted(index_, m, residual_, node.sorted[static_cast<std::size_t>(slot_[m])])
                        : split_score_single(index_, m, residual_, node.rows, scratch_);
      node.scores[m] = split.score;
      node.cut_ranks[m] = split.cut_rank;
    }
    node.dirty = false;
  }

  void choose_candidates(std::vector<std::size_t>& out) {
    out.clear();
    if (model_.split_log.size() < 2 * hp_.n_trees || hp_.random_update >= 1.0) {
      out = active_;
      return;
    }
    const double want = std::llround(hp_.random_update * static_cast<double>(active_.size()));
    const auto count = std::min(active_.size(), static_cast<std::size_t>(std::max(want, 1.0)));
    for (std::size_t pos : rng_.sample_without_replacement(active_.size(), count)) out.push_back(active_[pos]);
  }

  std::pair<std::size_t, std::size_t> pick(const std::vector<std::size_t>& candidates, std::size_t min_class,
                                           std::vector<double>& flat) {
    if (std::isinf(hp_.alpha)) {
      double top = -kInfinity;
      for (std::size_t c : candidates) {
        if (priority_class(sets_[c].depth) == min_class) top = std::max(top, sets_[c].best);
      }
      ties_.clear();
      for (std::size_t c : candidates) {
        const auto& set = sets_[c];
        if (priority_class(set.depth) != min_class || set.best != top) continue;
        for (std::size_t m = 0; m < num_groups_; ++m) {
          if (set.scores[m] == top) ties_.emplace_back(c, m);
        }
      }
      return ties_.size() > 1 ? ties_[rng_.index(ties_.size())] : ties_.front();
    }
    flat.assign(candidates.size() * num_groups_, -kInfinity);
    for (std::size_t a = 0; a < candidates.size(); ++a) {
      const auto& set = sets_[candidates[a]];
      if (priority_class(set.depth) != min_class) continue;
      std::copy(set.scores.begin(), set.scores.end(), flat.begin() + static_cast<std::ptrdiff_t>(a * num_groups_));
    }
    const std::size_t choice = select_update(flat, hp_.alpha, rng_);
    return {candidates[choice / num_groups_], choice % num_groups_};
  }

  void apply(std::size_t set_id, std::size_t group) {
    active_.erase(std::find(active_.begin(), active_.end(), set_id));
    SetState set = std::move(sets_[set_id]);
    sets_[set_id] = SetState{};

    const std::size_t round = model_.split_log.size() + 1;
    Tree& tree = model_.trees[set.tree];
    const bool multi = index_.is_multi(group);
    const auto& spec = schema_.groups[group];
    auto codes = index_.codes(group);
    const std::size_t arity = multi ? index_.num_levels(group) : 2;
    double drop = 0.0;
    std::size_t updated = 0;
    changed_.clear();
    std::vector<std::vector<NodeState>> families;  // split children of each updated node

    for (std::size_t node_id : set.nodes) {
      NodeState node = std::move(nodes_[node_id]);
      nodes_[node_id] = NodeState{};
      for (RowIndex i : node.rows) row_node_[set.tree][i] = -1;

      const std::uint32_t cut_rank = multi ? 0 : node.cut_ranks[group];
      std::vector<std::size_t> sizes(arity, 0);
      for (RowIndex i : node.rows) {
        const std::uint32_t c = multi ? codes[i] : (codes[i] > cut_rank ? 0 : 1);
        child_of_[i] = c;
        ++sizes[c];
      }
      const auto valid = children_valid_for_update(sizes, hp_);
      if (valid.empty()) continue;
      ++updated;
      auto& fresh = families.emplace_back();

      // Child j's position in `fresh`, or -1 when it will not be split further.
      std::vector<std::int32_t> fresh_slot(arity, -1);
      std::vector<double> sums(arity, 0.0);
      for (RowIndex i : node.rows) sums[child_of_[i]] += residual_[i];
      std::vector<double> increment(arity, 0.0);
      std::vector<bool> keep(arity, false);
      for (std::size_t j : valid) {
        keep[j] = true;
        increment[j] = sums[j] / static_cast<double>(sizes[j]);

        TreeNode child;
        child.parent = node.tree_node;
        child.depth = static_cast<std::uint32_t>(set.depth + 1);
        child.increment = increment[j];
        if (multi) {
          child.constraint = {spec.columns[j], Constraint::Op::Greater, 0.0};
        } else {
          child.constraint = {spec.columns[0], j == 0 ? Constraint::Op::Greater : Constraint::Op::LessEqual,
                              index_.value_of_rank(group, cut_rank)};
        }
        const auto child_id = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes[static_cast<std::size_t>(node.tree_node)].children.push_back(child_id);
        tree.nodes.push_back(std::move(child));

        if (node_valid_for_split(sizes[j], set.depth + 1, hp_)) {
          fresh_slot[j] = static_cast<std::int32_t>(fresh.size());
          NodeState& next = fresh.emplace_back();
          next.tree_node = child_id;
          next.rows.reserve(sizes[j]);
          next.sorted.resize(node.sorted.size());
          for (auto& list : next.sorted) list.reserve(sizes[j]);
        }
      }

      for (RowIndex i : node.rows) {
        const std::uint32_t c = child_of_[i];
        if (!keep[c]) continue;
        const double before = residual_[i];
        const double after = before - increment[c];
        residual_[i] = after;
        drop += before * before - after * after;
        changed_.push_back(i);
        if (fresh_slot[c] >= 0) fresh[static_cast<std::size_t>(fresh_slot[c])].rows.push_back(i);
      }
      for (std::size_t w = 0; w < node.sorted.size(); ++w) {
        for (RowIndex i : node.sorted[w]) {
          const std::int32_t f = fresh_slot[child_of_[i]];
          if (f >= 0) fresh[static_cast<std::size_t>(f)].sorted[w].push_back(i);
        }
      }
    }

    if (updated == 0) return;

    RoundRecord record;
    record.round = round;
    record.tree = set.tree;
    record.group = group;
    record.parent_round = set.parent_round;
    record.impurity_drop = drop;
    record.nodes_updated = updated;
    record.depth = set.depth;
    model_.split_log.push_back(record);

    for (std::size_t t = 0; t < row_node_.size(); ++t) {
      if (t == set.tree) continue;
      const auto& owner = row_node_[t];
      for (RowIndex i : changed_) {
        const std::int32_t id = owner[i];
        if (id < 0) continue;
        NodeState& node = nodes_[static_cast<std::size_t>(id)];
        if (node.dirty) continue;
        node.dirty = true;
        sets_[node.set].dirty = true;
      }
    }
    for (auto& fresh : families) {
      if (!fresh.empty()) add_set(set.tree, set.depth + 1, round, std::move(fresh));
    }
  }

  const FeatureSchema& schema_;
  const Hyperparams& hp_;
  Rng& rng_;
  SplitIndex index_;
  std::size_t num_groups_;
  std::vector<std::int32_t> slot_;  // group -> sorted slot, or -1
  CollabTreesModel model_;
  std::vector<double> residual_;
  std::vector<NodeState> nodes_;
  std::vector<SetState> sets_;
  std::vector<std::size_t> active_;
  std::vector<std::vector<std::int32_t>> row_node_;  // [tree][row] -> active node id or -1
  std::vector<std::uint32_t> child_of_;
  std::vector<RowIndex> changed_;
  std::vector<std::pair<std::size_t, std::size_t>> ties_;
  ScoreScratch scratch_;
};

}  // namespace

CollabTreesModel grow(const EncodedDataset& data, const FeatureSchema& schema, const Hyperparams& hp, Rng& rng) {
  hp.validate();
  return Grower(data, schema, hp, rng).run();
}

EnsembleModel grow_ensemble(const EncodedDataset& data, const FeatureSchema& schema, const Hyperparams& hp,
                            std::size_t threads) {
  hp.validate();
  if (data.n() < 2) throw Error(ErrorCategory::Training, "training needs at least two rows");
  EnsembleModel ensemble;
  ensemble.schema = schema;
  ensemble.hyperparams = hp;
  ensemble.models.resize(hp.n_estimators);
  ensemble.bootstrap.resize(hp.n_estimators);
  double ss = 0.0;
  for (double v : data.y) ss += v * v;
  ensemble.response_variance = ss / static_cast<double>(data.n());

  auto train_member = [&](std::size_t b) {
    Rng rng = Rng::derive(hp.seed, b);
    std::vector<std::size_t> rows(data.n());
    for (auto& r : rows) r = rng.index(data.n());
    EncodedDataset sample = data.select_rows(rows);
    ensemble.models[b] = grow(sample, schema, hp, rng);
    ensemble.bootstrap[b] = std::move(rows);
  };

  threads = std::max<std::size_t>(1, std::min(threads, hp.n_estimators));
  if (threads == 1) {
    for (std::size_t b = 0; b < hp.n_estimators; ++b) train_member(b);
    return ensemble;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < hp.n_estimators; b = next++) {
        try {
          train_member(b);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return ensemble;
}

}  // namespace collab
