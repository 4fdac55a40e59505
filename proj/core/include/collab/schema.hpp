#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "collab/table.hpp"

namespace collab {

enum class ColumnRole { Response, Binary, Continuous, Categorical, Ignore };

struct ColumnSpec {
  std::string name;
  ColumnRole role = ColumnRole::Ignore;
};

ColumnRole parse_role(std::string_view text);  // throws Config on unknown roles
std::string_view role_name(ColumnRole role);

/// Sidecar format: one `name role` (or `name=role`) pair per line, `#` comments.
std::vector<ColumnSpec> parse_column_specs(std::istream& in);
std::vector<ColumnSpec> read_column_specs(const std::filesystem::path& path);

enum class GroupKind { BinarySingle, ContinuousSingle, BinnedContinuous, CategoricalOneHot };

std::string_view group_kind_name(GroupKind kind);
GroupKind parse_group_kind(std::string_view text);

/// One feature group: a single encoded column, or a block of one-hot columns.
struct GroupSpec {
  std::string name;
  GroupKind kind = GroupKind::ContinuousSingle;
  std::vector<std::size_t> columns;  // indices into the encoded matrix
  std::vector<double> bin_edges;     // BinnedContinuous: strictly ascending cut points
  std::vector<std::string> categories;  // CategoricalOneHot levels; BinarySingle: {level0, level1}

  std::size_t size() const { return columns.size(); }
  bool is_multi() const { return columns.size() > 1; }
};

/// Maps raw columns to M feature groups. Multi-feature groups come first, so
/// groups [0, num_multi) have size >= 2 and the rest have size 1.
struct FeatureSchema {
  std::vector<GroupSpec> groups;
  std::size_t num_multi = 0;
  std::size_t num_features = 0;
  std::string response;

  std::size_t num_groups() const { return groups.size(); }
  std::vector<std::string> labels() const;

  /// Throws Schema when the groups do not partition [0, num_features) or the
  /// ordering rule is broken.
  void validate() const;
};

/// Builds the schema from annotated columns. With `n_bins`, continuous columns
/// become quantile-binned one-hot groups; otherwise they stay single features.
FeatureSchema build_schema(const RawTable& table, std::span<const ColumnSpec> specs,
                           std::optional<int> n_bins = std::nullopt);

/// Equal-count bin edges: empirical quantiles at k/n_bins with duplicate
/// edges merged and edges equal to the maximum dropped.
std::vector<double> quantile_bin_edges(std::vector<double> values, int n_bins);

/// Bin index under right-closed intervals; the lowest bin is also left-closed.
std::size_t bin_index(std::span<const double> edges, double value);

}  // namespace collab
