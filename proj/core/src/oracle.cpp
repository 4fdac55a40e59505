#include "collab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include "collab/error.hpp"
#include "collab/table.hpp"
#include "collab/xmdi.hpp"

namespace collab {

void DiscreteDistribution::validate() const {
  const std::size_t m = arity.size();
  if (m == 0) throw Error(ErrorCategory::Argument, "distribution has no groups");
  if (levels.size() != probability.size() * m) throw Error(ErrorCategory::Argument, "level table size mismatch");
  if (probability.size() > kMaxSupport) {
    throw Error(ErrorCategory::Sizing, "support exceeds " + std::to_string(kMaxSupport) + " points");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probability.size(); ++i) {
    if (!(probability[i] >= 0.0)) throw Error(ErrorCategory::Argument, "negative probability");
    total += probability[i];
    for (std::size_t g = 0; g < m; ++g) {
      if (level(i, g) >= arity[g]) throw Error(ErrorCategory::Argument, "level outside the group's arity");
    }
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCategory::Argument, "probabilities sum to " + format_number(total) + ", not 1");
  }
}

void RegressionSpec::center(const DiscreteDistribution& dist) {
  if (f.size() != dist.num_points()) throw Error(ErrorCategory::Argument, "f table size does not match the support");
  double mean = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) mean += dist.probability[i] * f[i];
  for (double& v : f) v -= mean;
}

namespace {

std::size_t checked_support_size(std::span<const std::size_t> arity) {
  std::size_t total = 1;
  for (std::size_t a : arity) {
    if (a < 2) throw Error(ErrorCategory::Argument, "every group needs at least two levels");
    if (total > kMaxSupport / a) {
      throw Error(ErrorCategory::Sizing, "support exceeds " + std::to_string(kMaxSupport) + " points");
    }
    total *= a;
  }
  return total;
}

// Point indices sorted by their levels on `groups`, then grouped into runs.
std::vector<std::pair<std::size_t, std::size_t>> group_runs(const DiscreteDistribution& dist,
                                                            std::span<const std::size_t> groups,
                                                            std::vector<std::size_t>& order) {
  order.resize(dist.num_points());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    for (std::size_t g : groups) {
      const auto la = dist.level(a, g);
      const auto lb = dist.level(b, g);
      if (la != lb) return la < lb;
    }
    return false;
  };
  std::stable_sort(order.begin(), order.end(), less);
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= order.size(); ++i) {
    if (i == order.size() || less(order[start], order[i])) {
      runs.emplace_back(start, i);
      start = i;
    }
  }
  return runs;
}

double weighted_variance(const DiscreteDistribution& dist, std::span<const double> h) {
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    mean += dist.probability[i] * h[i];
    second += dist.probability[i] * h[i] * h[i];
  }
  return std::max(0.0, second - mean * mean);
}

void check_groups(const DiscreteDistribution& dist, std::span<const std::size_t> groups) {
  if (groups.empty()) throw Error(ErrorCategory::Argument, "group set is empty");
  for (std::size_t g : groups) {
    if (g >= dist.num_groups()) {
      throw Error(ErrorCategory::Argument, "group index " + std::to_string(g) + " is out of range");
    }
  }
}

}  // namespace

DiscreteDistribution independent_distribution(const std::vector<std::vector<double>>& level_probabilities) {
  DiscreteDistribution dist;
  for (const auto& probs : level_probabilities) dist.arity.push_back(probs.size());
  const std::size_t total = checked_support_size(dist.arity);
  const std::size_t m = dist.arity.size();
  for (std::size_t g = 0; g < m; ++g) dist.labels.push_back("x" + std::to_string(g + 1));
  std::vector<std::uint32_t> point(m, 0);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    double p = 1.0;
    for (std::size_t g = m; g-- > 0;) {
      point[g] = static_cast<std::uint32_t>(rest % dist.arity[g]);
      rest /= dist.arity[g];
    }
    for (std::size_t g = 0; g < m; ++g) p *= level_probabilities[g][point[g]];
    if (p <= 0.0) continue;
    dist.levels.insert(dist.levels.end(), point.begin(), point.end());
    dist.probability.push_back(p);
  }
  dist.validate();
  return dist;
}

DiscreteDistribution independent_binary(std::span<const double> success_probabilities) {
  std::vector<std::vector<double>> probs;
  for (double q : success_probabilities) {
    if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCategory::Argument, "success probability outside [0, 1]");
    probs.push_back({1.0 - q, q});
  }
  return independent_distribution(probs);
}

std::vector<double> conditional_mean(const DiscreteDistribution& dist, std::span<const double> h,
                                     std::span<const std::size_t> groups) {
  std::vector<double> out(dist.num_points(), 0.0);
  if (groups.empty()) {
    double mean = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) mean += dist.probability[i] * h[i];
    std::fill(out.begin(), out.end(), mean);
    return out;
  }
  std::vector<std::size_t> order;
  for (auto [begin, end] : group_runs(dist, groups, order)) {
    double mass = 0.0;
    double sum = 0.0;
    for (std::size_t r = begin; r < end; ++r) {
      mass += dist.probability[order[r]];
      sum += dist.probability[order[r]] * h[order[r]];
    }
    const double value = mass > 0.0 ? sum / mass : 0.0;
    for (std::size_t r = begin; r < end; ++r) out[order[r]] = value;
  }
  return out;
}

double projected_variance(const DiscreteDistribution& dist, std::span<const double> h,
                          std::span<const std::size_t> groups) {
  return weighted_variance(dist, conditional_mean(dist, h, groups));
}

EffectTable population_g(const DiscreteDistribution& dist, const RegressionSpec& spec,
                         std::span<const std::size_t> groups) {
  check_groups(dist, groups);
  if (groups.size() > 2) throw Error(ErrorCategory::Argument, "effects are defined for one or two groups");
  if (groups.size() == 2 && groups[0] == groups[1]) throw Error(ErrorCategory::Argument, "pair repeats a group");
  std::vector<std::size_t> rest;
  for (std::size_t g = 0; g < dist.num_groups(); ++g) {
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) rest.push_back(g);
  }
  const auto given_rest = conditional_mean(dist, spec.f, rest);
  std::vector<double> centered(spec.f.size());
  for (std::size_t i = 0; i < centered.size(); ++i) centered[i] = spec.f[i] - given_rest[i];

  EffectTable table;
  table.groups.assign(groups.begin(), groups.end());
  table.per_point = conditional_mean(dist, centered, groups);

  std::vector<std::size_t> sizes;
  for (std::size_t g : groups) sizes.push_back(dist.arity[g]);
  const std::size_t configs = checked_support_size(sizes);
  table.configurations.resize(configs);
  table.values.assign(configs, 0.0);
  for (std::size_t c = 0; c < configs; ++c) {
    std::size_t r = c;
    table.configurations[c].resize(sizes.size());
    for (std::size_t j = sizes.size(); j-- > 0;) {
      table.configurations[c][j] = static_cast<std::uint32_t>(r % sizes[j]);
      r /= sizes[j];
    }
  }
  for (std::size_t i = 0; i < dist.num_points(); ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < groups.size(); ++j) c = c * sizes[j] + dist.level(i, groups[j]);
    table.values[c] = table.per_point[i];
  }
  return table;
}

double additive_effect(const DiscreteDistribution& dist, const RegressionSpec& spec, std::size_t m) {
  const std::size_t g[] = {m};
  return weighted_variance(dist, population_g(dist, spec, g).per_point);
}

double interaction_effect(const DiscreteDistribution& dist, const RegressionSpec& spec, std::size_t l,
                          std::size_t k) {
  const std::size_t lk[] = {std::min(l, k), std::max(l, k)};
  const std::size_t gl[] = {l};
  const std::size_t gk[] = {k};
  const auto joint = population_g(dist, spec, lk).per_point;
  const auto a = population_g(dist, spec, gl).per_point;
  const auto b = population_g(dist, spec, gk).per_point;
  std::vector<double> pure(joint.size());
  for (std::size_t i = 0; i < pure.size(); ++i) pure[i] = joint[i] - a[i] - b[i];
  return weighted_variance(dist, pure);
}

double pursuit_objective(const DiscreteDistribution& dist, const RegressionSpec& spec,
                         std::span<const double> fitted, std::span<const std::size_t> groups) {
  std::vector<double> h(spec.f.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = spec.f[i] - fitted[i];
  return projected_variance(dist, h, groups);
}

PursuitPath matching_pursuit_path(const DiscreteDistribution& dist, const RegressionSpec& spec, std::size_t k) {
  const std::size_t m = dist.num_groups();
  if (k < 1 || k > m) throw Error(ErrorCategory::Argument, "pursuit length must lie in [1, M]");
  PursuitPath path;
  path.residual.emplace_back(dist.num_points(), 0.0);

  auto step = [&](std::vector<std::vector<std::size_t>> candidates) {
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    PursuitStep st;
    const auto& fitted = path.residual.back();
    std::vector<double> h(spec.f.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = spec.f[i] - fitted[i];
    std::size_t best = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      st.candidate_objectives.push_back(projected_variance(dist, h, candidates[c]));
      if (st.candidate_objectives[c] > st.candidate_objectives[best] + 1e-12) best = c;
    }
    st.selected = candidates[best];
    st.objective = st.candidate_objectives[best];
    st.candidates = std::move(candidates);
    const auto projection = conditional_mean(dist, h, st.selected);
    std::vector<double> next(fitted);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] += projection[i];
    path.residual.push_back(std::move(next));
    return st;
  };

  std::vector<std::vector<std::size_t>> singletons;
  for (std::size_t g = 0; g < m; ++g) singletons.push_back({g});
  for (std::size_t s = 0; s < k; ++s) path.steps.push_back(step(singletons));

  // Pairs reachable below each root step.
  std::vector<std::vector<std::vector<std::size_t>>> reachable(k);
  for (std::size_t s = 0; s < k; ++s) {
    const std::size_t l = path.steps[s].selected.front();
    for (std::size_t g = 0; g < m; ++g) {
      if (g != l) reachable[s].push_back({std::min(l, g), std::max(l, g)});
    }
  }
  std::vector<std::size_t> open(k);
  std::iota(open.begin(), open.end(), std::size_t{0});
  for (std::size_t s = 0; s < k && !open.empty(); ++s) {
    std::vector<std::vector<std::size_t>> theta;
    for (std::size_t l : open) theta.insert(theta.end(), reachable[l].begin(), reachable[l].end());
    if (theta.empty()) break;
    PursuitStep st = step(std::move(theta));
    for (std::size_t l : open) {
      if (std::find(reachable[l].begin(), reachable[l].end(), st.selected) != reachable[l].end()) {
        st.k_hat = l;
        break;
      }
    }
    open.erase(std::find(open.begin(), open.end(), *st.k_hat));
    path.steps.push_back(std::move(st));
  }
  return path;
}

double brute_force_split_score(std::span<const double> residuals, const Matrix& x, std::span<const RowIndex> rows,
                               std::span<const std::size_t> columns) {
  if (rows.empty()) return 0.0;
  auto within_ss = [&](const std::vector<RowIndex>& members) {
    if (members.empty()) return 0.0;
    double mean = 0.0;
    for (RowIndex i : members) mean += residuals[i];
    mean /= static_cast<double>(members.size());
    double ss = 0.0;
    for (RowIndex i : members) ss += (residuals[i] - mean) * (residuals[i] - mean);
    return ss;
  };
  double total = 0.0;
  for (RowIndex i : rows) total += residuals[i] * residuals[i];

  if (columns.size() > 1) {
    double ss = 0.0;
    for (std::size_t col : columns) {
      std::vector<RowIndex> child;
      for (RowIndex i : rows) {
        if (x(i, col) == 1.0) child.push_back(i);
      }
      ss += within_ss(child);
    }
    return total - ss;
  }
  const std::size_t col = columns[0];
  double best = -kInfinity;
  for (RowIndex a : rows) {
    const double cut = x(a, col);
    std::vector<RowIndex> above, below;
    for (RowIndex i : rows) (x(i, col) > cut ? above : below).push_back(i);
    best = std::max(best, total - within_ss(above) - within_ss(below));
  }
  return best;
}

OracleModel parse_oracle_model(std::istream& in) {
  OracleModel model;
  std::vector<std::size_t> widths;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCategory::Schema, "oracle model line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string head;
    if (!(fields >> head)) continue;
    if (head == "groups") {
      std::size_t w;
      while (fields >> w) {
        if (w == 0) fail("group width must be positive");
        widths.push_back(w);
        model.dist.arity.push_back(w == 1 ? 2 : w);
      }
      if (widths.empty()) fail("no groups listed");
      continue;
    }
    if (head == "labels") {
      std::string name;
      while (fields >> name) model.dist.labels.push_back(name);
      continue;
    }
    if (head == "noise_sd") {
      if (!(fields >> model.spec.noise_sd) || model.spec.noise_sd < 0.0) fail("bad noise_sd");
      continue;
    }
    if (widths.empty()) fail("support rows must follow the groups line");
    const std::size_t p = std::accumulate(widths.begin(), widths.end(), std::size_t{0});
    if (head.size() != p) fail("expected " + std::to_string(p) + " configuration bits");
    std::string prob_text, f_text;
    if (!(fields >> prob_text >> f_text)) fail("expected bits, probability and f value");
    auto prob = parse_number(prob_text);
    auto value = parse_number(f_text);
    if (!prob || !value) fail("probability and f value must be numeric");
    std::size_t at = 0;
    for (std::size_t g = 0; g < widths.size(); ++g) {
      const std::string_view bits(head.data() + at, widths[g]);
      at += widths[g];
      if (bits.find_first_not_of("01") != std::string_view::npos) fail("configuration bits must be 0 or 1");
      if (widths[g] == 1) {
        model.dist.levels.push_back(bits[0] == '1' ? 1 : 0);
      } else {
        if (std::count(bits.begin(), bits.end(), '1') != 1) fail("one-hot group needs exactly one set bit");
        model.dist.levels.push_back(static_cast<std::uint32_t>(bits.find('1')));
      }
    }
    model.dist.probability.push_back(*prob);
    model.spec.f.push_back(*value);
    if (model.dist.probability.size() > kMaxSupport) {
      throw Error(ErrorCategory::Sizing, "support exceeds " + std::to_string(kMaxSupport) + " points");
    }
  }
  if (model.dist.labels.empty()) {
    for (std::size_t g = 0; g < model.dist.arity.size(); ++g) model.dist.labels.push_back("x" + std::to_string(g + 1));
  }
  if (model.dist.labels.size() != model.dist.arity.size()) {
    throw Error(ErrorCategory::Schema, "label count does not match the group count");
  }
  model.dist.validate();
  model.spec.center(model.dist);
  return model;
}

OracleModel read_oracle_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot open " + path.string());
  return parse_oracle_model(in);
}

std::string format_oracle_model(const OracleModel& model) {
  const auto& dist = model.dist;
  std::ostringstream out;
  out.precision(17);
  out << "groups";
  for (std::size_t a : dist.arity) out << ' ' << (a == 2 ? 1 : a);
  out << "\nlabels";
  for (const auto& l : dist.labels) out << ' ' << l;
  out << "\nnoise_sd " << model.spec.noise_sd << '\n';
  for (std::size_t i = 0; i < dist.num_points(); ++i) {
    for (std::size_t g = 0; g < dist.num_groups(); ++g) {
      if (dist.arity[g] == 2) {
        out << dist.level(i, g);
      } else {
        for (std::size_t j = 0; j < dist.arity[g]; ++j) out << (dist.level(i, g) == j ? '1' : '0');
      }
    }
    out << ' ' << dist.probability[i] << ' ' << model.spec.f[i] << '\n';
  }
  return out.str();
}

}  // namespace collab
