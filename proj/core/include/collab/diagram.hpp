#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "collab/xmdi.hpp"

namespace collab {

/// Numeric mappings for the network diagram. Node width grows linearly from
/// min_width (zero importance) to max_width (largest importance); node fill
/// runs from `red` (additive share 0) to `blue` (share 1); edge gray level
/// runs from gray_light (ratio 0) to gray_dark (ratio 1), as a fraction of
/// white; pen width grows linearly with the interaction cell.
struct DiagramStyle {
  double min_width = 0.3;
  double max_width = 2.0;
  double gray_light = 0.85;
  double gray_dark = 0.10;
  double min_penwidth = 0.5;
  double max_penwidth = 6.0;
  std::string blue = "#2166ac";
  std::string red = "#b2182b";
  double node_threshold = 1e-4;  // times the response variance
  double edge_threshold = 1e-4;  // times the response variance
};

struct DiagramNode {
  std::string label;
  double importance = 0.0;      // overall XMDI_i
  double additive_ratio = 0.0;  // XMDI_ii / XMDI_i
  double standardized = 0.0;    // XMDI_i / var(Y)
  double width = 0.0;
  std::string color;
};

/// Directed edge `from -> to`; the ratio uses the head's importance.
struct DiagramEdge {
  std::string from;
  std::string to;
  double strength = 0.0;  // XMDI_ij
  double ratio = 0.0;     // XMDI_ij / XMDI_to
  double penwidth = 0.0;
  std::string gray;
};

struct DiagramSpec {
  std::vector<DiagramNode> nodes;  // sorted by label
  std::vector<DiagramEdge> edges;  // sorted by (from, to)
  double max_interaction_ratio = 0.0;
  double max_standardized_importance = 0.0;
};

/// Throws Argument for a nonpositive variance, mismatched or duplicate labels.
DiagramSpec diagram_spec(const XmdiMatrix& matrix, double response_variance, std::span<const std::string> labels,
                         const DiagramStyle& style = {});

std::string emit_dot(const DiagramSpec& spec);

}  // namespace collab
