#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "xbandit/rng.hpp"

namespace xbandit {

inline constexpr double kInfiniteBeta = std::numeric_limits<double>::infinity();

/// (alpha, beta, C, C') description of a second-order Pareto law:
///   |1 - C x^-alpha - F(x)| <= C' x^(-alpha (1 + beta))  for x >= 0.
/// beta = kInfiniteBeta marks an exact Pareto tail.
struct TailSpec {
  double alpha = 2.0;
  double beta = kInfiniteBeta;
  double C = 1.0;
  double Cprime = 0.0;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
  bool has_finite_beta() const noexcept { return std::isfinite(beta); }

  friend bool operator==(const TailSpec&, const TailSpec&) = default;
};

/// Exact Pareto law: F(x) = 1 - C x^-alpha on [C^(1/alpha), inf).
class ExactPareto {
 public:
  /// Requires alpha > 1 and C > 0 (throws std::invalid_argument otherwise).
  ExactPareto(double alpha, double C);

  double alpha() const noexcept { return alpha_; }
  double scale() const noexcept { return C_; }
  double support_min() const noexcept { return x_min_; }

  double cdf(double x) const noexcept;
  /// Inverse cdf on [0, 1): x_min (1 - u)^(-1/alpha).
  double quantile(double u) const noexcept { return x_min_ * std::pow(1.0 - u, -inv_alpha_); }
  double mean() const noexcept;

  template <class Generator>
  double sample(Generator& rng) const {
    return quantile(to_unit_interval(rng()));
  }

  /// The tail description of this law; any C' >= 0 is admissible on the support.
  TailSpec tail(double Cprime = 0.0, double beta = kInfiniteBeta) const noexcept {
    return TailSpec{alpha_, beta, C_, Cprime};
  }

 private:
  double alpha_;
  double C_;
  double inv_alpha_;
  double x_min_;
};

/// Gamma function; throws std::domain_error at poles and for non-finite results.
double gamma_fn(double x);

/// Frechet approximation of E[max of T draws]: (T C)^(1/alpha) Gamma(1 - 1/alpha).
double frechet_value(double T, double alpha, double C);

/// Exact E[max of T i.i.d. exact Pareto draws] from order statistics:
///   C^(1/alpha) Gamma(T + 1) Gamma(1 - 1/alpha) / Gamma(T + 1 - 1/alpha).
double expected_max_exact(double T, double alpha, double C);

/// Smallest horizon for which the Frechet error bound applies. Requires a finite
/// beta and C' > 0.
double min_horizon_q1(const TailSpec& tail);

/// Upper bound on |E[max of T] - frechet_value(T)| for T >= min_horizon_q1(tail).
double frechet_error_bound(double T, const TailSpec& tail);

/// Tail description of X^r when X follows `tail`.
TailSpec power_transform(const TailSpec& tail, double r);

struct MaxBounds {
  double lower;
  double upper;
};

/// High-probability envelope for the max of T draws:
///   P(max <= lower) <= delta and P(max >= upper) <= delta
/// once T is large enough for the second-order term to be dominated.
MaxBounds high_prob_bounds(double T, double delta, double alpha, double C);

/// Checks the second-order Pareto inequality at every grid point.
bool validate_second_order(const std::function<double(double)>& cdf, const TailSpec& tail,
                           std::span<const double> grid);

/// 512-point geometric grid over [x_min, 1e6 x_min].
std::vector<double> default_validation_grid(double x_min, std::size_t points = 512);

}  // namespace xbandit
