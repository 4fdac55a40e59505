#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "collab/schema.hpp"
#include "collab/table.hpp"

namespace collab {

/// Row-major n x p matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }

  Matrix select_rows(std::span<const std::size_t> indices) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Encoded features plus the centered response. One-hot columns hold 0/1;
/// continuous-single columns keep their raw values.
struct EncodedDataset {
  Matrix x;
  std::vector<double> y;  // centered
  double y_mean = 0.0;

  std::size_t n() const { return x.rows(); }
  std::size_t p() const { return x.cols(); }

  /// Resample rows; the response is kept as stored (not re-centered).
  EncodedDataset select_rows(std::span<const std::size_t> indices) const;
};

/// Encodes features only (prediction path). Unseen categorical or binary
/// levels are rejected with an Encode error.
Matrix encode_features(const RawTable& table, const FeatureSchema& schema);

/// Encodes features and centers the response column named by the schema.
EncodedDataset encode(const RawTable& table, const FeatureSchema& schema);

/// Builds a dataset from an already-encoded matrix and raw response.
EncodedDataset make_dataset(Matrix x, std::span<const double> y);

/// Index of the hot column of a multi-feature group within the group, or of
/// the level for a binary group. Throws Encode when no column is hot.
std::size_t decode_group_level(std::span<const double> row, const GroupSpec& group);

}  // namespace collab
