#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "collab/forest.hpp"

namespace collab {

/// Symmetric M x M importance matrix. Diagonal cells hold additive
/// attributions, off-diagonal cells pairwise interaction attributions, in
/// units of response variance. A round attributed to {l, k} adds its whole
/// drop to both (l, k) and (k, l).
class XmdiMatrix {
 public:
  XmdiMatrix() = default;
  explicit XmdiMatrix(std::size_t m) : m_(m), values_(m * m, 0.0) {}

  std::size_t size() const { return m_; }
  double operator()(std::size_t l, std::size_t k) const { return values_[l * m_ + k]; }
  void add(std::size_t l, std::size_t k, double v);
  void set(std::size_t l, std::size_t k, double v);

  /// Sum over distinct cells (l <= k).
  double distinct_sum() const;
  const std::vector<double>& values() const { return values_; }
  bool operator==(const XmdiMatrix&) const = default;

 private:
  std::size_t m_ = 0;
  std::vector<double> values_;
};

using Attribution = std::pair<std::size_t, std::size_t>;  // (min, max)

/// Resolves the (m_s, u_s) pair of the round at `position` in `log`.
/// Throws CorruptLog when a parent round is missing or not earlier.
Attribution attribute_round(const SplitLog& log, std::size_t position);

/// Attributions of every round, in log order.
std::vector<Attribution> attribute_all(const SplitLog& log);

/// Each round's drop divided by n is added to its attributed cell.
XmdiMatrix compute_xmdi(const CollabTreesModel& model, std::size_t n);
inline XmdiMatrix compute_xmdi(const CollabTreesModel& model) { return compute_xmdi(model, model.n_train); }

/// Overall importance per group: the row sums.
std::vector<double> overall(const XmdiMatrix& matrix);

/// Element-wise mean of the member matrices.
XmdiMatrix ensemble_xmdi(const EnsembleModel& ensemble);

/// `group_i,group_j,xmdi` rows for the upper triangle, 10 significant digits.
std::string xmdi_csv(const XmdiMatrix& matrix, std::span<const std::string> labels);
/// `group,xmdi` rows of overall importances.
std::string overall_csv(const XmdiMatrix& matrix, std::span<const std::string> labels);

struct LabeledXmdi {
  std::vector<std::string> labels;  // in first-appearance order
  XmdiMatrix matrix;
};

/// Reads the upper-triangle export back.
LabeledXmdi parse_xmdi_csv(std::istream& in);

std::string format_number(double v);  // 10 significant digits

}  // namespace collab
