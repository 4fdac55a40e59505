#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "collab/dataset.hpp"
#include "collab/random.hpp"

namespace collab {

struct CopulaConfig {
  std::size_t n = 0;
  std::size_t p = 0;
  double lambda = 0.0;  // AR(1) correlation, in [0, 1)
  std::uint64_t seed = 42;

  void validate() const;  // throws Argument
};

/// Uniform marginals with Gaussian-copula dependence corr(Z_k, Z_l) = lambda^|k-l|.
Matrix gaussian_copula_ar1(std::size_t n, std::size_t p, double lambda, Rng& rng);
Matrix gaussian_copula_ar1(const CopulaConfig& cfg);

double standard_normal_cdf(double z);
double standard_normal_quantile(double u);  // inverse of the above

/// 5 x1 + 20 (x3 - 0.5)^2 + 15 x5 + 2 x9 + 10 sin(pi (x9 - 0.5)(x10 - 0.5)); needs p >= 10.
double friedman_variant(std::span<const double> x);
/// 2 x10 + 10 sin(pi (xj - 0.5)(x10 - 0.5)) summed over j in {2, 6, 9}; needs p >= 10.
double sine_interactions(std::span<const double> x);

/// Responses with N(0, noise_sd^2) errors, one normal draw per row.
std::vector<double> model_y1(const Matrix& x, Rng& rng, double noise_sd = 1.0);
std::vector<double> model_y2(const Matrix& x, Rng& rng, double noise_sd = 1.0);

struct LinearTerm {
  std::size_t feature = 0;  // 0-based
  double beta = 0.0;
};

struct XorTerm {
  std::size_t first = 0;
  std::size_t second = 0;
  double beta = 0.0;
};

/// Binary model: sum of beta_m (X_m - pi_m) plus, per pair, +beta when
/// (X_l - pi_l)(X_k - pi_k) > 0 and -beta when it is < 0.
struct XorLinearSpec {
  std::vector<LinearTerm> linear;
  std::vector<XorTerm> interactions;
  std::vector<double> marginals;  // P(X_j = 1); empty means 0.5 for all
  double noise_sd = 0.0;

  void validate(std::size_t p) const;  // throws Argument
  double marginal(std::size_t j) const { return marginals.empty() ? 0.5 : marginals[j]; }
  double signal(std::span<const double> x) const;
};

struct SimulatedData {
  Matrix x;
  std::vector<double> y;
};

SimulatedData xor_linear_binary(std::size_t n, std::size_t p, const XorLinearSpec& spec, Rng& rng);

/// Monte Carlo estimate of Var(f) / (Var(f) + noise_sd^2) for the first model.
double r2_ceiling_y1(std::size_t n, std::size_t p, double lambda, std::uint64_t seed, double noise_sd = 1.0);

/// CSV with header x1..xp,y.
std::string simulated_csv(const Matrix& x, std::span<const double> y);

}  // namespace collab
