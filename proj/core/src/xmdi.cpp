#include "collab/xmdi.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <sstream>
#include <unordered_map>

#include "collab/error.hpp"
#include "collab/table.hpp"

namespace collab {

void XmdiMatrix::add(std::size_t l, std::size_t k, double v) {
  values_[l * m_ + k] += v;
  if (l != k) values_[k * m_ + l] += v;
}

void XmdiMatrix::set(std::size_t l, std::size_t k, double v) {
  values_[l * m_ + k] = v;
  values_[k * m_ + l] = v;
}

double XmdiMatrix::distinct_sum() const {
  double total = 0.0;
  for (std::size_t l = 0; l < m_; ++l) {
    for (std::size_t k = l; k < m_; ++k) total += (*this)(l, k);
  }
  return total;
}

namespace {

std::size_t position_of_round(const SplitLog& log, std::size_t round,
                              const std::unordered_map<std::size_t, std::size_t>* lookup) {
  if (round >= 1 && round <= log.size() && log[round - 1].round == round) return round - 1;
  if (lookup) {
    if (auto it = lookup->find(round); it != lookup->end()) return it->second;
  } else {
    for (std::size_t i = 0; i < log.size(); ++i) {
      if (log[i].round == round) return i;
    }
  }
  throw Error(ErrorCategory::CorruptLog, "round " + std::to_string(round) + " is referenced but not logged");
}

}  // namespace

Attribution attribute_round(const SplitLog& log, std::size_t position) {
  if (position >= log.size()) throw Error(ErrorCategory::Argument, "round position out of range");
  const std::size_t m = log[position].group;
  // u follows the parent chain while the group repeats.
  std::size_t at = position;
  for (;;) {
    const auto& rec = log[at];
    if (!rec.parent_round) return {m, m};
    if (*rec.parent_round >= rec.round) {
      throw Error(ErrorCategory::CorruptLog, "round " + std::to_string(rec.round) + " names a later parent");
    }
    const std::size_t parent = position_of_round(log, *rec.parent_round, nullptr);
    if (log[parent].group != rec.group) return std::minmax(m, log[parent].group);
    at = parent;
  }
}

std::vector<Attribution> attribute_all(const SplitLog& log) {
  std::unordered_map<std::size_t, std::size_t> lookup;
  for (std::size_t i = 0; i < log.size(); ++i) lookup.emplace(log[i].round, i);
  std::vector<std::size_t> u(log.size());
  std::vector<Attribution> out(log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& rec = log[i];
    if (!rec.parent_round) {
      u[i] = rec.group;
    } else {
      if (*rec.parent_round >= rec.round) {
        throw Error(ErrorCategory::CorruptLog, "round " + std::to_string(rec.round) + " names a later parent");
      }
      const std::size_t parent = position_of_round(log, *rec.parent_round, &lookup);
      if (parent >= i) throw Error(ErrorCategory::CorruptLog, "log is not in round order");
      u[i] = log[parent].group == rec.group ? u[parent] : log[parent].group;
    }
    out[i] = std::minmax(rec.group, u[i]);
  }
  return out;
}

XmdiMatrix compute_xmdi(const CollabTreesModel& model, std::size_t n) {
  if (n == 0) throw Error(ErrorCategory::Argument, "sample size must be positive");
  XmdiMatrix matrix(model.num_groups);
  const auto pairs = attribute_all(model.split_log);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [l, k] = pairs[i];
    if (l >= matrix.size() || k >= matrix.size()) {
      throw Error(ErrorCategory::CorruptLog, "logged group index out of range");
    }
    matrix.add(l, k, model.split_log[i].impurity_drop / static_cast<double>(n));
  }
  return matrix;
}

std::vector<double> overall(const XmdiMatrix& matrix) {
  std::vector<double> out(matrix.size(), 0.0);
  for (std::size_t m = 0; m < matrix.size(); ++m) {
    for (std::size_t l = 0; l < matrix.size(); ++l) out[m] += matrix(l, m);
  }
  return out;
}

XmdiMatrix ensemble_xmdi(const EnsembleModel& ensemble) {
  if (ensemble.models.empty()) return XmdiMatrix(ensemble.schema.num_groups());
  XmdiMatrix mean(ensemble.models.front().num_groups);
  const double scale = 1.0 / static_cast<double>(ensemble.models.size());
  for (const auto& model : ensemble.models) {
    const XmdiMatrix member = compute_xmdi(model);
    if (member.size() != mean.size()) throw Error(ErrorCategory::CorruptLog, "members disagree on the group count");
    for (std::size_t l = 0; l < mean.size(); ++l) {
      for (std::size_t k = l; k < mean.size(); ++k) mean.add(l, k, member(l, k) * scale);
    }
  }
  return mean;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string xmdi_csv(const XmdiMatrix& matrix, std::span<const std::string> labels) {
  if (labels.size() != matrix.size()) throw Error(ErrorCategory::Argument, "label count does not match the matrix");
  std::ostringstream out;
  out << "group_i,group_j,xmdi\n";
  for (std::size_t l = 0; l < matrix.size(); ++l) {
    for (std::size_t k = l; k < matrix.size(); ++k) {
      out << labels[l] << ',' << labels[k] << ',' << format_number(matrix(l, k)) << '\n';
    }
  }
  return out.str();
}

std::string overall_csv(const XmdiMatrix& matrix, std::span<const std::string> labels) {
  if (labels.size() != matrix.size()) throw Error(ErrorCategory::Argument, "label count does not match the matrix");
  std::ostringstream out;
  out << "group,xmdi\n";
  const auto totals = overall(matrix);
  for (std::size_t m = 0; m < totals.size(); ++m) out << labels[m] << ',' << format_number(totals[m]) << '\n';
  return out.str();
}

LabeledXmdi parse_xmdi_csv(std::istream& in) {
  const RawTable table = parse_csv(in);
  const std::size_t ci = table.column_index("group_i");
  const std::size_t cj = table.column_index("group_j");
  const std::size_t cv = table.column_index("xmdi");
  LabeledXmdi out;
  auto label_index = [&](const std::string& name) {
    auto it = std::find(out.labels.begin(), out.labels.end(), name);
    if (it != out.labels.end()) return static_cast<std::size_t>(it - out.labels.begin());
    out.labels.push_back(name);
    return out.labels.size() - 1;
  };
  struct Cell {
    std::size_t l, k;
    double v;
  };
  std::vector<Cell> cells;
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    const auto& row = table.rows[r];
    auto v = parse_number(row[cv]);
    if (!v) throw Error(ErrorCategory::Schema, "xmdi row " + std::to_string(r + 1) + " is not numeric");
    const std::size_t l = label_index(row[ci]);
    const std::size_t k = label_index(row[cj]);
    cells.push_back({l, k, *v});
  }
  out.matrix = XmdiMatrix(out.labels.size());
  for (const auto& c : cells) out.matrix.set(c.l, c.k, c.v);
  return out;
}

}  // namespace collab
