#include "collab/dataset.hpp"

#include <algorithm>
#include <numeric>

#include "collab/error.hpp"

namespace collab {

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    auto src = row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

EncodedDataset EncodedDataset::select_rows(std::span<const std::size_t> indices) const {
  EncodedDataset out;
  out.x = x.select_rows(indices);
  out.y.reserve(indices.size());
  for (std::size_t i : indices) out.y.push_back(y[i]);
  out.y_mean = y_mean;
  return out;
}

Matrix encode_features(const RawTable& table, const FeatureSchema& schema) {
  Matrix x(table.num_rows(), schema.num_features);
  for (const auto& group : schema.groups) {
    const std::size_t col = table.column_index(group.name);
    for (std::size_t i = 0; i < table.num_rows(); ++i) {
      const std::string& cell = table.rows[i][col];
      switch (group.kind) {
        case GroupKind::BinarySingle:
        case GroupKind::CategoricalOneHot: {
          auto it = std::find(group.categories.begin(), group.categories.end(), cell);
          if (it == group.categories.end()) {
            throw Error(ErrorCategory::Encode,
                        "level '" + cell + "' of column '" + group.name + "' was not seen when the schema was built");
          }
          auto level = static_cast<std::size_t>(it - group.categories.begin());
          if (group.kind == GroupKind::BinarySingle) {
            x(i, group.columns[0]) = static_cast<double>(level);
          } else {
            x(i, group.columns[level]) = 1.0;
          }
          break;
        }
        case GroupKind::ContinuousSingle:
        case GroupKind::BinnedContinuous: {
          auto value = parse_number(cell);
          if (!value) {
            throw Error(ErrorCategory::Encode,
                        "column '" + group.name + "' row " + std::to_string(i + 1) + ": '" + cell + "' is not numeric");
          }
          if (group.kind == GroupKind::ContinuousSingle) {
            x(i, group.columns[0]) = *value;
          } else {
            x(i, group.columns[bin_index(group.bin_edges, *value)]) = 1.0;
          }
          break;
        }
      }
    }
  }
  return x;
}

EncodedDataset make_dataset(Matrix x, std::span<const double> y) {
  if (x.rows() != y.size()) throw Error(ErrorCategory::Argument, "feature and response lengths differ");
  EncodedDataset out;
  out.x = std::move(x);
  out.y.assign(y.begin(), y.end());
  if (!out.y.empty()) {
    out.y_mean = std::accumulate(out.y.begin(), out.y.end(), 0.0) / static_cast<double>(out.y.size());
    for (double& v : out.y) v -= out.y_mean;
  }
  return out;
}

EncodedDataset encode(const RawTable& table, const FeatureSchema& schema) {
  if (schema.response.empty()) throw Error(ErrorCategory::Config, "schema has no response column");
  const std::size_t ycol = table.column_index(schema.response);
  std::vector<double> y;
  y.reserve(table.num_rows());
  for (std::size_t i = 0; i < table.num_rows(); ++i) {
    auto v = parse_number(table.rows[i][ycol]);
    if (!v) {
      throw Error(ErrorCategory::Encode, "response row " + std::to_string(i + 1) + ": '" +
                                             table.rows[i][ycol] + "' is missing or not numeric");
    }
    y.push_back(*v);
  }
  return make_dataset(encode_features(table, schema), y);
}

std::size_t decode_group_level(std::span<const double> row, const GroupSpec& group) {
  if (!group.is_multi()) return row[group.columns[0]] > 0.0 ? 1 : 0;
  for (std::size_t j = 0; j < group.columns.size(); ++j) {
    if (row[group.columns[j]] == 1.0) return j;
  }
  throw Error(ErrorCategory::Encode, "no hot column in group '" + group.name + "'");
}

}  // namespace collab
