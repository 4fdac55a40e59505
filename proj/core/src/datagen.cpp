#include "collab/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "collab/error.hpp"

namespace collab {

void CopulaConfig::validate() const {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw Error(ErrorCategory::Argument, "lambda must lie in [0, 1)");
  if (p == 0) throw Error(ErrorCategory::Argument, "p must be positive");
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double standard_normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    if (u == 0.0) return -std::numeric_limits<double>::infinity();
    if (u == 1.0) return std::numeric_limits<double>::infinity();
    throw Error(ErrorCategory::Argument, "quantile level outside [0, 1]");
  }
  // Acklam's rational approximation, refined by two Newton steps.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  double z;
  if (u < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(u));
    z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u > 1.0 - 0.02425) {
    const double q = std::sqrt(-2.0 * std::log1p(-u));
    z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = u - 0.5;
    const double r = q * q;
    z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  for (int i = 0; i < 2; ++i) {
    const double err = standard_normal_cdf(z) - u;
    z -= err * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * z * z);
  }
  return z;
}

Matrix gaussian_copula_ar1(std::size_t n, std::size_t p, double lambda, Rng& rng) {
  CopulaConfig{n, p, lambda, 0}.validate();
  Matrix x(n, p);
  const double innovation = std::sqrt(1.0 - lambda * lambda);
  for (std::size_t i = 0; i < n; ++i) {
    double z = rng.normal();
    x(i, 0) = standard_normal_cdf(z);
    for (std::size_t j = 1; j < p; ++j) {
      z = lambda * z + innovation * rng.normal();
      x(i, j) = standard_normal_cdf(z);
    }
  }
  return x;
}

Matrix gaussian_copula_ar1(const CopulaConfig& cfg) {
  Rng rng(cfg.seed);
  return gaussian_copula_ar1(cfg.n, cfg.p, cfg.lambda, rng);
}

namespace {

void require_ten_columns(std::size_t p) {
  if (p < 10) throw Error(ErrorCategory::Argument, "the model needs at least 10 features, got " + std::to_string(p));
}

double sine_term(double a, double b) { return 10.0 * std::sin(std::numbers::pi * (a - 0.5) * (b - 0.5)); }

}  // namespace

double friedman_variant(std::span<const double> x) {
  require_ten_columns(x.size());
  const double q = x[2] - 0.5;
  return 5.0 * x[0] + 20.0 * q * q + 15.0 * x[4] + 2.0 * x[8] + sine_term(x[8], x[9]);
}

double sine_interactions(std::span<const double> x) {
  require_ten_columns(x.size());
  return 2.0 * x[9] + sine_term(x[1], x[9]) + sine_term(x[5], x[9]) + sine_term(x[8], x[9]);
}

namespace {

template <typename F>
std::vector<double> with_noise(const Matrix& x, Rng& rng, double noise_sd, F&& f) {
  require_ten_columns(x.cols());
  if (!(noise_sd >= 0.0)) throw Error(ErrorCategory::Argument, "noise_sd must be nonnegative");
  std::vector<double> y(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    y[i] = f(x.row(i));
    if (noise_sd > 0.0) y[i] += noise_sd * rng.normal();
  }
  return y;
}

}  // namespace

std::vector<double> model_y1(const Matrix& x, Rng& rng, double noise_sd) {
  return with_noise(x, rng, noise_sd, friedman_variant);
}

std::vector<double> model_y2(const Matrix& x, Rng& rng, double noise_sd) {
  return with_noise(x, rng, noise_sd, sine_interactions);
}

void XorLinearSpec::validate(std::size_t p) const {
  if (!marginals.empty() && marginals.size() != p) {
    throw Error(ErrorCategory::Argument, "marginals must list one probability per feature");
  }
  for (double q : marginals) {
    if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCategory::Argument, "marginal probabilities must lie in (0, 1)");
  }
  std::vector<bool> seen(p, false);
  for (const auto& t : linear) {
    if (t.feature >= p) throw Error(ErrorCategory::Argument, "linear term index out of range");
    if (seen[t.feature]) throw Error(ErrorCategory::Argument, "linear term repeats a feature");
    seen[t.feature] = true;
  }
  for (std::size_t a = 0; a < interactions.size(); ++a) {
    const auto& t = interactions[a];
    if (t.first >= p || t.second >= p) throw Error(ErrorCategory::Argument, "interaction index out of range");
    if (t.first == t.second) throw Error(ErrorCategory::Argument, "interaction pairs a feature with itself");
    for (std::size_t b = 0; b < a; ++b) {
      const auto& u = interactions[b];
      if (std::minmax(t.first, t.second) == std::minmax(u.first, u.second)) {
        throw Error(ErrorCategory::Argument, "interaction pair listed twice");
      }
    }
  }
  if (!(noise_sd >= 0.0)) throw Error(ErrorCategory::Argument, "noise_sd must be nonnegative");
}

double XorLinearSpec::signal(std::span<const double> x) const {
  double f = 0.0;
  for (const auto& t : linear) f += t.beta * (x[t.feature] - marginal(t.feature));
  for (const auto& t : interactions) {
    const double prod = (x[t.first] - marginal(t.first)) * (x[t.second] - marginal(t.second));
    if (prod > 0.0) f += t.beta;
    if (prod < 0.0) f -= t.beta;
  }
  return f;
}

SimulatedData xor_linear_binary(std::size_t n, std::size_t p, const XorLinearSpec& spec, Rng& rng) {
  spec.validate(p);
  SimulatedData out{Matrix(n, p), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    auto row = out.x.row(i);
    for (std::size_t j = 0; j < p; ++j) row[j] = rng.uniform() < spec.marginal(j) ? 1.0 : 0.0;
    out.y[i] = spec.signal(row);
    if (spec.noise_sd > 0.0) out.y[i] += spec.noise_sd * rng.normal();
  }
  return out;
}

double r2_ceiling_y1(std::size_t n, std::size_t p, double lambda, std::uint64_t seed, double noise_sd) {
  if (n < 2) throw Error(ErrorCategory::Argument, "need at least two draws");
  Rng rng(seed);
  // Streams rows to keep memory flat at large n.
  const double innovation = std::sqrt(1.0 - lambda * lambda);
  std::vector<double> row(p);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double z = rng.normal();
    row[0] = standard_normal_cdf(z);
    for (std::size_t j = 1; j < p; ++j) {
      z = lambda * z + innovation * rng.normal();
      row[j] = standard_normal_cdf(z);
    }
    const double f = friedman_variant(row);
    const double delta = f - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (f - mean);
  }
  const double var = m2 / static_cast<double>(n);
  return var / (var + noise_sd * noise_sd);
}

std::string simulated_csv(const Matrix& x, std::span<const double> y) {
  std::ostringstream out;
  for (std::size_t j = 0; j < x.cols(); ++j) out << 'x' << j + 1 << ',';
  out << "y\n";
  char buf[40];
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", x(i, j));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", y[i]);
    out << buf << '\n';
  }
  return out.str();
}

}  // namespace collab
