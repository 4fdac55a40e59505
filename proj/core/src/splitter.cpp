#include "collab/splitter.hpp"

#include <algorithm>
#include <cmath>

#include "collab/error.hpp"

namespace collab {

SplitIndex::SplitIndex(const Matrix& x, const FeatureSchema& schema) {
  const std::size_t n = x.rows();
  groups_.resize(schema.num_groups());
  for (std::size_t m = 0; m < schema.num_groups(); ++m) {
    const auto& spec = schema.groups[m];
    auto& table = groups_[m];
    table.codes.resize(n);
    if (spec.is_multi()) {
      table.multi = true;
      table.levels = spec.size();
      for (std::size_t i = 0; i < n; ++i) {
        auto row = x.row(i);
        std::size_t hot = spec.size();
        for (std::size_t j = 0; j < spec.size(); ++j) {
          if (row[spec.columns[j]] > 0.0) {
            hot = j;
            break;
          }
        }
        if (hot == spec.size()) {
          throw Error(ErrorCategory::Encode, "row " + std::to_string(i) + " has no hot column in group '" +
                                                 spec.name + "'");
        }
        table.codes[i] = static_cast<std::uint32_t>(hot);
      }
    } else {
      const std::size_t col = spec.columns[0];
      table.values.resize(n);
      for (std::size_t i = 0; i < n; ++i) table.values[i] = x(i, col);
      std::sort(table.values.begin(), table.values.end());
      table.values.erase(std::unique(table.values.begin(), table.values.end()), table.values.end());
      table.levels = table.values.size();
      for (std::size_t i = 0; i < n; ++i) {
        auto it = std::lower_bound(table.values.begin(), table.values.end(), x(i, col));
        table.codes[i] = static_cast<std::uint32_t>(it - table.values.begin());
      }
    }
  }
}

double split_score_group(const SplitIndex& index, std::size_t group, std::span<const double> residuals,
                         std::span<const RowIndex> rows, ScoreScratch& scratch) {
  const std::size_t levels = index.num_levels(group);
  scratch.sums.assign(levels, 0.0);
  scratch.counts.assign(levels, 0);
  auto codes = index.codes(group);
  for (RowIndex i : rows) {
    const auto c = codes[i];
    scratch.sums[c] += residuals[i];
    ++scratch.counts[c];
  }
  double score = 0.0;
  for (std::size_t j = 0; j < levels; ++j) {
    if (scratch.counts[j]) score += scratch.sums[j] * scratch.sums[j] / scratch.counts[j];
  }
  return score;
}

namespace {

// Scans cuts in ascending value order given per-level sums and counts.
template <typename Visit>
SingleSplit scan_cuts(double total_sum, std::size_t total_count, Visit&& visit_levels) {
  SingleSplit best;
  best.score = -1.0;
  double left_sum = 0.0;
  std::size_t left_count = 0;
  visit_levels([&](std::uint32_t rank, double sum, std::uint32_t count) {
    left_sum += sum;
    left_count += count;
    const std::size_t right_count = total_count - left_count;
    const double right_sum = total_sum - left_sum;
    double score = left_sum * left_sum / static_cast<double>(left_count);
    if (right_count) score += right_sum * right_sum / static_cast<double>(right_count);
    if (score > best.score) {
      best.score = score;
      best.cut_rank = rank;
    }
  });
  if (best.score < 0.0) best.score = 0.0;
  return best;
}

}  // namespace

SingleSplit split_score_single(const SplitIndex& index, std::size_t group, std::span<const double> residuals,
                               std::span<const RowIndex> rows, ScoreScratch& scratch) {
  if (rows.empty()) return {};
  auto codes = index.codes(group);
  const std::size_t levels = index.num_levels(group);
  double total = 0.0;
  for (RowIndex i : rows) total += residuals[i];

  SingleSplit best;
  if (levels <= 2 * rows.size() + 32) {
    scratch.sums.assign(levels, 0.0);
    scratch.counts.assign(levels, 0);
    for (RowIndex i : rows) {
      scratch.sums[codes[i]] += residuals[i];
      ++scratch.counts[codes[i]];
    }
    best = scan_cuts(total, rows.size(), [&](auto&& visit) {
      for (std::uint32_t r = 0; r < levels; ++r) {
        if (scratch.counts[r]) visit(r, scratch.sums[r], scratch.counts[r]);
      }
    });
  } else {
    auto& ranked = scratch.ranked;
    ranked.clear();
    for (RowIndex i : rows) ranked.emplace_back(codes[i], i);
    std::sort(ranked.begin(), ranked.end());
    best = scan_cuts(total, rows.size(), [&](auto&& visit) {
      std::size_t k = 0;
      while (k < ranked.size()) {
        const std::uint32_t r = ranked[k].first;
        double sum = 0.0;
        std::uint32_t count = 0;
        for (; k < ranked.size() && ranked[k].first == r; ++k) {
          sum += residuals[ranked[k].second];
          ++count;
        }
        visit(r, sum, count);
      }
    });
  }
  best.cut = index.value_of_rank(group, best.cut_rank);
  return best;
}

SingleSplit split_score_sorted(const SplitIndex& index, std::size_t group, std::span<const double> residuals,
                               std::span<const RowIndex> sorted_rows) {
  const std::size_t m = sorted_rows.size();
  if (m == 0) return {};
  auto codes = index.codes(group);
  double total = 0.0;
  for (RowIndex i : sorted_rows) total += residuals[i];
  SingleSplit best;
  best.score = -1.0;
  double left_sum = 0.0;
  std::uint32_t rank = codes[sorted_rows[0]];
  for (std::size_t k = 0; k < m; ++k) {
    left_sum += residuals[sorted_rows[k]];
    const std::uint32_t next = k + 1 < m ? codes[sorted_rows[k + 1]] : rank + 1;
    if (next == rank) continue;
    const std::size_t left_count = k + 1;
    const std::size_t right_count = m - left_count;
    const double right_sum = total - left_sum;
    double score = left_sum * left_sum / static_cast<double>(left_count);
    if (right_count) score += right_sum * right_sum / static_cast<double>(right_count);
    if (score > best.score) {
      best.score = score;
      best.cut_rank = rank;
    }
    rank = next;
  }
  best.cut = index.value_of_rank(group, best.cut_rank);
  return best;
}

double penalty(std::span<const std::size_t> update_list_depths, std::size_t candidate_depth) {
  const std::size_t candidate = priority_class(candidate_depth);
  for (std::size_t d : update_list_depths) {
    if (priority_class(d) < candidate) return kInfinity;
  }
  return 0.0;
}

std::vector<double> update_probabilities(std::span<const double> penalized_scores, double alpha) {
  std::vector<double> weights(penalized_scores.size(), 0.0);
  double top = -kInfinity;
  for (double s : penalized_scores) top = std::max(top, s);
  if (!(top > -kInfinity)) {
    throw Error(ErrorCategory::Internal, "every update candidate carries an infinite penalty");
  }
  double total = 0.0;
  if (std::isinf(alpha)) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (penalized_scores[i] == top) weights[i] = 1.0;
      total += weights[i];
    }
  } else {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const double s = penalized_scores[i];
      if (s > -kInfinity) weights[i] = std::exp(alpha * (s - top));
      total += weights[i];
    }
  }
  for (double& w : weights) w /= total;
  return weights;
}

std::size_t select_update(std::span<const double> penalized_scores, double alpha, Rng& rng) {
  if (penalized_scores.empty()) throw Error(ErrorCategory::Internal, "no update candidates");
  double top = -kInfinity;
  for (double s : penalized_scores) top = std::max(top, s);
  if (!(top > -kInfinity)) {
    throw Error(ErrorCategory::Internal, "every update candidate carries an infinite penalty");
  }
  if (std::isinf(alpha)) {
    std::size_t ties = 0;
    for (double s : penalized_scores) ties += (s == top);
    std::size_t pick = ties > 1 ? rng.index(ties) : 0;
    for (std::size_t i = 0; i < penalized_scores.size(); ++i) {
      if (penalized_scores[i] == top && pick-- == 0) return i;
    }
  }
  double total = 0.0;
  std::vector<double> weights(penalized_scores.size(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double s = penalized_scores[i];
    if (s > -kInfinity) weights[i] = std::exp(alpha * (s - top));
    total += weights[i];
  }
  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (target < acc) return i;
  }
  return last;
}

}  // namespace collab
