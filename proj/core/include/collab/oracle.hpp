#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "collab/splitter.hpp"

namespace collab {

inline constexpr std::size_t kMaxSupport = std::size_t{1} << 20;

/// Exact law of a vector of discrete feature groups. Each support point is
/// stored as one level per group: 0/1 for a binary group, the hot column for
/// a one-hot group.
struct DiscreteDistribution {
  std::vector<std::size_t> arity;  // levels per group; 2 for binary groups
  std::vector<std::string> labels;
  std::vector<std::uint32_t> levels;  // support point i, group m at [i * M + m]
  std::vector<double> probability;

  std::size_t num_groups() const { return arity.size(); }
  std::size_t num_points() const { return probability.size(); }
  std::uint32_t level(std::size_t point, std::size_t group) const { return levels[point * arity.size() + group]; }

  /// Throws Argument when probabilities do not sum to one or levels overflow.
  void validate() const;
};

/// Regression function tabulated on the support, plus noise scale.
struct RegressionSpec {
  std::vector<double> f;
  double noise_sd = 0.0;

  /// Subtracts E f(X) so the table has mean zero.
  void center(const DiscreteDistribution& dist);
};

struct OracleModel {
  DiscreteDistribution dist;
  RegressionSpec spec;
};

/// Text format, `#` comments:
///   groups <columns of group 1> <columns of group 2> ...   (1 = binary)
///   labels <name> ...                                      (optional)
///   noise_sd <value>                                        (optional)
///   <bits> <probability> <f>                                (one line per support point)
/// Bits list the encoded columns in group order; a one-hot group has exactly
/// one set bit. The table is centered on load.
OracleModel parse_oracle_model(std::istream& in);
OracleModel read_oracle_model(const std::filesystem::path& path);
std::string format_oracle_model(const OracleModel& model);

/// Independent groups with P(level) given per group; f evaluated on every
/// configuration. Throws Sizing beyond kMaxSupport points.
DiscreteDistribution independent_distribution(const std::vector<std::vector<double>>& level_probabilities);
DiscreteDistribution independent_binary(std::span<const double> success_probabilities);

template <typename F>
RegressionSpec tabulate(const DiscreteDistribution& dist, F&& f, double noise_sd = 0.0) {
  RegressionSpec spec;
  spec.noise_sd = noise_sd;
  spec.f.resize(dist.num_points());
  std::vector<std::uint32_t> point(dist.num_groups());
  for (std::size_t i = 0; i < dist.num_points(); ++i) {
    for (std::size_t m = 0; m < dist.num_groups(); ++m) point[m] = dist.level(i, m);
    spec.f[i] = f(std::span<const std::uint32_t>(point));
  }
  spec.center(dist);
  return spec;
}

/// E(h | X_J) evaluated at every support point. Cells of zero probability
/// get 0.
std::vector<double> conditional_mean(const DiscreteDistribution& dist, std::span<const double> h,
                                     std::span<const std::size_t> groups);

/// g_J over configurations of the groups in J.
struct EffectTable {
  std::vector<std::size_t> groups;
  std::vector<std::vector<std::uint32_t>> configurations;  // ascending lexicographic
  std::vector<double> values;
  std::vector<double> per_point;  // g_J at each support point
};

/// g_J(X) = E(f - E(f | X_{-J}) | X_J) for #J in {1, 2}.
EffectTable population_g(const DiscreteDistribution& dist, const RegressionSpec& spec,
                         std::span<const std::size_t> groups);

double additive_effect(const DiscreteDistribution& dist, const RegressionSpec& spec, std::size_t m);
double interaction_effect(const DiscreteDistribution& dist, const RegressionSpec& spec, std::size_t l, std::size_t k);

/// Var[E(h | X_J)].
double projected_variance(const DiscreteDistribution& dist, std::span<const double> h,
                          std::span<const std::size_t> groups);

struct PursuitStep {
  std::vector<std::size_t> selected;  // sorted group indices
  double objective = 0.0;
  std::vector<std::vector<std::size_t>> candidates;  // the constraint set searched
  std::vector<double> candidate_objectives;
  std::optional<std::size_t> k_hat;  // for pair steps: index into the first K steps
};

struct PursuitPath {
  std::vector<PursuitStep> steps;            // 2K steps
  std::vector<std::vector<double>> residual;  // R*_0 .. R*_2K on the support
};

/// Greedy projection pursuit with singleton steps, then heredity-constrained
/// pair steps. Ties go to the lexicographically smallest set.
PursuitPath matching_pursuit_path(const DiscreteDistribution& dist, const RegressionSpec& spec, std::size_t k);

/// Objective of a candidate set after the given residual table.
double pursuit_objective(const DiscreteDistribution& dist, const RegressionSpec& spec,
                         std::span<const double> fitted, std::span<const std::size_t> groups);

/// Direct split-score evaluation with explicit loops and, for a single
/// feature, every observed cut. `columns` are the group's encoded columns;
/// rows may hold any encoded values.
double brute_force_split_score(std::span<const double> residuals, const Matrix& x, std::span<const RowIndex> rows,
                               std::span<const std::size_t> columns);

}  // namespace collab
