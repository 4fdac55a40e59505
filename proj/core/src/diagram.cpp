#include "collab/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

#include "collab/error.hpp"

namespace collab {

namespace {

struct Rgb {
  int r, g, b;
};

Rgb parse_hex(const std::string& hex) {
  unsigned r = 0, g = 0, b = 0;
  if (hex.size() != 7 || hex[0] != '#' || std::sscanf(hex.c_str() + 1, "%2x%2x%2x", &r, &g, &b) != 3) {
    throw Error(ErrorCategory::Argument, "colors must be #rrggbb, got '" + hex + "'");
  }
  return {static_cast<int>(r), static_cast<int>(g), static_cast<int>(b)};
}

std::string to_hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

std::string blend(const Rgb& from, const Rgb& to, double t) {
  auto mix = [t](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
  return to_hex({mix(from.r, to.r), mix(from.g, to.g), mix(from.b, to.b)});
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string quoted(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

DiagramSpec diagram_spec(const XmdiMatrix& matrix, double response_variance, std::span<const std::string> labels,
                         const DiagramStyle& style) {
  if (!(response_variance > 0.0)) throw Error(ErrorCategory::Argument, "response variance must be positive");
  if (labels.size() != matrix.size()) throw Error(ErrorCategory::Argument, "label count does not match the matrix");
  if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size()) {
    throw Error(ErrorCategory::Argument, "diagram labels must be unique");
  }
  const Rgb blue = parse_hex(style.blue);
  const Rgb red = parse_hex(style.red);
  const auto totals = overall(matrix);
  const std::size_t m = matrix.size();

  DiagramSpec spec;
  std::vector<bool> shown(m, false);
  double top = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    shown[i] = totals[i] > style.node_threshold * response_variance;
    if (shown[i]) top = std::max(top, totals[i]);
    spec.max_standardized_importance = std::max(spec.max_standardized_importance, totals[i] / response_variance);
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!shown[i]) continue;
    DiagramNode node;
    node.label = labels[i];
    node.importance = totals[i];
    node.additive_ratio = std::clamp(ratio(matrix(i, i), totals[i]), 0.0, 1.0);
    node.standardized = totals[i] / response_variance;
    node.width = style.min_width + (style.max_width - style.min_width) * ratio(totals[i], top);
    node.color = blend(red, blue, node.additive_ratio);
    spec.nodes.push_back(std::move(node));
  }

  double strongest = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      strongest = std::max(strongest, matrix(i, j));
      spec.max_interaction_ratio =
          std::max({spec.max_interaction_ratio, ratio(matrix(i, j), totals[i]), ratio(matrix(i, j), totals[j])});
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j || !shown[i] || !shown[j]) continue;
      const double cell = matrix(i, j);
      if (!(cell > style.edge_threshold * response_variance)) continue;
      DiagramEdge edge;
      edge.from = labels[i];
      edge.to = labels[j];
      edge.strength = cell;
      edge.ratio = std::clamp(ratio(cell, totals[j]), 0.0, 1.0);
      edge.penwidth = style.min_penwidth + (style.max_penwidth - style.min_penwidth) * ratio(cell, strongest);
      const double level = style.gray_light + (style.gray_dark - style.gray_light) * edge.ratio;
      const int g = static_cast<int>(std::lround(std::clamp(level, 0.0, 1.0) * 255.0));
      edge.gray = to_hex({g, g, g});
      spec.edges.push_back(std::move(edge));
    }
  }
  std::sort(spec.nodes.begin(), spec.nodes.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  std::sort(spec.edges.begin(), spec.edges.end(),
            [](const auto& a, const auto& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  return spec;
}

std::string emit_dot(const DiagramSpec& spec) {
  std::ostringstream out;
  out << "digraph xmdi {\n";
  out << "  graph [labelloc=t, label=" +
             quoted("max interaction ratio " + fixed(100.0 * spec.max_interaction_ratio, 2) +
                    "%, max standardized importance " + fixed(100.0 * spec.max_standardized_importance, 2) + "%") +
             "];\n";
  out << "  node [shape=circle, style=filled, fixedsize=true, fontcolor=white];\n";
  for (const auto& node : spec.nodes) {
    out << "  " << quoted(node.label) << " [width=" << fixed(node.width) << ", fillcolor=" << quoted(node.color)
        << ", tooltip=" << quoted("importance " + fixed(node.standardized * 100.0, 2) + "%, additive " +
                                  fixed(node.additive_ratio * 100.0, 2) + "%")
        << "];\n";
  }
  for (const auto& edge : spec.edges) {
    out << "  " << quoted(edge.from) << " -> " << quoted(edge.to) << " [penwidth=" << fixed(edge.penwidth)
        << ", color=" << quoted(edge.gray) << ", tooltip=" << quoted("ratio " + fixed(edge.ratio * 100.0, 2) + "%")
        << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace collab
