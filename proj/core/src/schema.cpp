#include "collab/schema.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "collab/error.hpp"

namespace collab {

namespace {

std::vector<std::string> distinct_levels(const RawTable& table, std::size_t col) {
  std::vector<std::string> levels;
  levels.reserve(table.num_rows());
  for (const auto& row : table.rows) levels.push_back(row[col]);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

std::vector<double> numeric_column(const RawTable& table, std::size_t col) {
  std::vector<double> values;
  values.reserve(table.num_rows());
  for (std::size_t i = 0; i < table.num_rows(); ++i) {
    auto v = parse_number(table.rows[i][col]);
    if (!v) {
      throw Error(ErrorCategory::Schema, "column '" + table.header[col] + "' row " + std::to_string(i + 1) +
                                             ": '" + table.rows[i][col] + "' is not numeric");
    }
    values.push_back(*v);
  }
  return values;
}

[[noreturn]] void single_value_error(const std::string& name) {
  throw Error(ErrorCategory::Schema, "column '" + name + "' has a single distinct value");
}

}  // namespace

ColumnRole parse_role(std::string_view text) {
  if (text == "response") return ColumnRole::Response;
  if (text == "binary") return ColumnRole::Binary;
  if (text == "continuous") return ColumnRole::Continuous;
  if (text == "categorical") return ColumnRole::Categorical;
  if (text == "ignore") return ColumnRole::Ignore;
  throw Error(ErrorCategory::Config, "unknown column role '" + std::string(text) + "'");
}

std::string_view role_name(ColumnRole role) {
  switch (role) {
    case ColumnRole::Response: return "response";
    case ColumnRole::Binary: return "binary";
    case ColumnRole::Continuous: return "continuous";
    case ColumnRole::Categorical: return "categorical";
    case ColumnRole::Ignore: return "ignore";
  }
  return "ignore";
}

std::vector<ColumnSpec> parse_column_specs(std::istream& in) {
  std::vector<ColumnSpec> specs;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), '=', ' ');
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    std::string name, role, extra;
    if (!(fields >> name)) continue;
    if (!(fields >> role) || (fields >> extra)) {
      throw Error(ErrorCategory::Config, "malformed column spec line: '" + line + "'");
    }
    specs.push_back({name, parse_role(role)});
  }
  return specs;
}

std::vector<ColumnSpec> read_column_specs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open '" + path.string() + "'");
  return parse_column_specs(in);
}

std::string_view group_kind_name(GroupKind kind) {
  switch (kind) {
    case GroupKind::BinarySingle: return "binary-single";
    case GroupKind::ContinuousSingle: return "continuous-single";
    case GroupKind::BinnedContinuous: return "binned-continuous";
    case GroupKind::CategoricalOneHot: return "categorical-onehot";
  }
  return "continuous-single";
}

GroupKind parse_group_kind(std::string_view text) {
  if (text == "binary-single") return GroupKind::BinarySingle;
  if (text == "continuous-single") return GroupKind::ContinuousSingle;
  if (text == "binned-continuous") return GroupKind::BinnedContinuous;
  if (text == "categorical-onehot") return GroupKind::CategoricalOneHot;
  throw Error(ErrorCategory::Schema, "unknown group kind '" + std::string(text) + "'");
}

std::vector<std::string> FeatureSchema::labels() const {
  std::vector<std::string> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(g.name);
  return out;
}

void FeatureSchema::validate() const {
  std::vector<int> seen(num_features, 0);
  for (std::size_t m = 0; m < groups.size(); ++m) {
    const auto& g = groups[m];
    if (g.columns.empty()) throw Error(ErrorCategory::Schema, "group '" + g.name + "' has no columns");
    if (m < num_multi && g.size() < 2) {
      throw Error(ErrorCategory::Schema, "multi-feature group '" + g.name + "' has fewer than two columns");
    }
    if (m >= num_multi && g.size() != 1) {
      throw Error(ErrorCategory::Schema, "group '" + g.name + "' is out of order: multi-feature groups come first");
    }
    for (std::size_t c : g.columns) {
      if (c >= num_features || seen[c]++) {
        throw Error(ErrorCategory::Schema, "group columns do not partition the encoded features");
      }
    }
    if (!std::is_sorted(g.bin_edges.begin(), g.bin_edges.end()) ||
        std::adjacent_find(g.bin_edges.begin(), g.bin_edges.end()) != g.bin_edges.end()) {
      throw Error(ErrorCategory::Schema, "bin edges of '" + g.name + "' are not strictly ascending");
    }
    if (g.kind == GroupKind::BinnedContinuous && g.bin_edges.size() + 1 != g.size()) {
      throw Error(ErrorCategory::Schema, "group '" + g.name + "' bin count does not match its columns");
    }
    if (g.kind == GroupKind::CategoricalOneHot && g.categories.size() != g.size()) {
      throw Error(ErrorCategory::Schema, "group '" + g.name + "' level count does not match its columns");
    }
  }
  if (std::any_of(seen.begin(), seen.end(), [](int s) { return s != 1; })) {
    throw Error(ErrorCategory::Schema, "group columns do not cover every encoded feature");
  }
}

std::vector<double> quantile_bin_edges(std::vector<double> values, int n_bins) {
  if (n_bins < 2) throw Error(ErrorCategory::Config, "n_bins must be at least 2");
  if (values.empty()) return {};
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double max_value = values.back();
  std::vector<double> edges;
  for (std::size_t k = 1; k < static_cast<std::size_t>(n_bins); ++k) {
    std::size_t pos = (k * n + static_cast<std::size_t>(n_bins) - 1) / static_cast<std::size_t>(n_bins);
    double edge = values[pos == 0 ? 0 : pos - 1];
    if (edge < max_value && (edges.empty() || edge > edges.back())) edges.push_back(edge);
  }
  if (edges.empty() && values.front() < max_value) {
    // Heavy ties at the top: fall back to a single cut below the maximum.
    auto below = std::lower_bound(values.begin(), values.end(), max_value);
    edges.push_back(*(below - 1));
  }
  return edges;
}

std::size_t bin_index(std::span<const double> edges, double value) {
  return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), value) - edges.begin());
}

FeatureSchema build_schema(const RawTable& table, std::span<const ColumnSpec> specs, std::optional<int> n_bins) {
  if (n_bins && *n_bins < 2) throw Error(ErrorCategory::Config, "n_bins must be at least 2");

  FeatureSchema schema;
  std::vector<GroupSpec> multi;
  std::vector<GroupSpec> single;
  std::set<std::string> seen;

  for (const auto& spec : specs) {
    if (!seen.insert(spec.name).second) {
      throw Error(ErrorCategory::Config, "column '" + spec.name + "' annotated twice");
    }
    if (spec.role == ColumnRole::Ignore) continue;
    if (spec.role == ColumnRole::Response) {
      if (!schema.response.empty()) throw Error(ErrorCategory::Config, "more than one response column");
      schema.response = spec.name;
      continue;
    }
    const std::size_t col = table.column_index(spec.name);
    GroupSpec group;
    group.name = spec.name;
    switch (spec.role) {
      case ColumnRole::Binary: {
        auto levels = distinct_levels(table, col);
        if (levels.size() < 2) single_value_error(spec.name);
        if (levels.size() > 2) {
          throw Error(ErrorCategory::Schema, "binary column '" + spec.name + "' has " +
                                                 std::to_string(levels.size()) + " distinct values");
        }
        auto a = parse_number(levels[0]);
        auto b = parse_number(levels[1]);
        if (a && b && *b < *a) std::swap(levels[0], levels[1]);
        group.kind = GroupKind::BinarySingle;
        group.categories = std::move(levels);
        group.columns.resize(1);
        single.push_back(std::move(group));
        break;
      }
      case ColumnRole::Categorical: {
        auto levels = distinct_levels(table, col);
        if (levels.size() < 2) single_value_error(spec.name);
        group.kind = GroupKind::CategoricalOneHot;
        group.columns.resize(levels.size());
        group.categories = std::move(levels);
        multi.push_back(std::move(group));
        break;
      }
      case ColumnRole::Continuous: {
        auto values = numeric_column(table, col);
        auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        if (values.empty() || *lo == *hi) single_value_error(spec.name);
        if (n_bins) {
          group.kind = GroupKind::BinnedContinuous;
          group.bin_edges = quantile_bin_edges(std::move(values), *n_bins);
          group.columns.resize(group.bin_edges.size() + 1);
          multi.push_back(std::move(group));
        } else {
          group.kind = GroupKind::ContinuousSingle;
          group.columns.resize(1);
          single.push_back(std::move(group));
        }
        break;
      }
      default:
        break;
    }
  }

  for (const auto& name : table.header) {
    if (!seen.count(name)) {
      throw Error(ErrorCategory::Config, "column '" + name + "' has no role annotation");
    }
  }
  if (multi.empty() && single.empty()) throw Error(ErrorCategory::Config, "no feature columns");

  std::size_t next = 0;
  for (auto& g : multi) {
    for (auto& c : g.columns) c = next++;
    schema.groups.push_back(std::move(g));
  }
  schema.num_multi = schema.groups.size();
  for (auto& g : single) {
    g.columns[0] = next++;
    schema.groups.push_back(std::move(g));
  }
  schema.num_features = next;
  schema.validate();
  return schema;
}

}  // namespace collab
