#include "xbandit/distributions.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

namespace xbandit {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_finite_second_order(const TailSpec& tail) {
  if (!tail.has_finite_beta())
    throw std::invalid_argument("Frechet bound constants are undefined for beta = inf; "
                                "substitute a finite beta");
  require(tail.Cprime > 0.0, "Frechet bound requires C' > 0");
}

}  // namespace

void TailSpec::validate() const {
  require(alpha > 1.0, "tail index alpha must exceed 1");
  require(C > 0.0, "scale C must be positive");
  require(Cprime >= 0.0, "second-order constant C' must be nonnegative");
  require(beta > 0.0, "second-order exponent beta must be positive");
}

ExactPareto::ExactPareto(double alpha, double C) : alpha_(alpha), C_(C) {
  require(alpha > 1.0 && std::isfinite(alpha), "exact Pareto requires finite alpha > 1");
  require(C > 0.0 && std::isfinite(C), "exact Pareto requires C > 0");
  inv_alpha_ = 1.0 / alpha_;
  x_min_ = std::pow(C_, inv_alpha_);
}

double ExactPareto::cdf(double x) const noexcept {
  if (x <= x_min_) return 0.0;
  return -std::expm1(std::log(C_) - alpha_ * std::log(x));
}

double ExactPareto::mean() const noexcept { return alpha_ * x_min_ / (alpha_ - 1.0); }

double gamma_fn(double x) {
  if (x <= 0.0 && x == std::floor(x)) throw std::domain_error("Gamma pole at nonpositive integer");
  const double g = std::tgamma(x);
  if (!std::isfinite(g)) throw std::domain_error("Gamma overflow");
  return g;
}

double frechet_value(double T, double alpha, double C) {
  require(T >= 1.0, "frechet_value requires T >= 1");
  if (!(alpha > 1.0)) throw std::domain_error("frechet_value requires alpha > 1");
  require(C > 0.0, "frechet_value requires C > 0");
  return std::pow(T * C, 1.0 / alpha) * gamma_fn(1.0 - 1.0 / alpha);
}

double expected_max_exact(double T, double alpha, double C) {
  require(T >= 1.0, "expected_max_exact requires T >= 1");
  if (!(alpha > 1.0)) throw std::domain_error("expected_max_exact requires alpha > 1");
  require(C > 0.0, "expected_max_exact requires C > 0");
  const double a = 1.0 / alpha;
  // Gamma(T + 1) / Gamma(T + 1 - a) = 1 / tgamma_delta_ratio(T + 1 - a, a).
  const double ratio = 1.0 / boost::math::tgamma_delta_ratio(T + 1.0 - a, a);
  return std::pow(C, a) * ratio * gamma_fn(1.0 - a);
}

double min_horizon_q1(const TailSpec& tail) {
  tail.validate();
  require_finite_second_order(tail);
  const double b = tail.beta;
  const double twice_cp = 2.0 * tail.Cprime;
  const double first = std::pow(twice_cp / tail.C, (1.0 + b) / b);
  const double second = std::pow(8.0 * tail.C, 1.0 + b);
  return std::max(first, second) / twice_cp;
}

double frechet_error_bound(double T, const TailSpec& tail) {
  tail.validate();
  require_finite_second_order(tail);
  const double q1 = min_horizon_q1(tail);
  if (T < q1)
    throw std::invalid_argument("frechet_error_bound requires T >= Q1 (" + std::to_string(q1) + ")");

  const double alpha = tail.alpha;
  const double beta = tail.beta;
  const double C = tail.C;
  const double Cp = tail.Cprime;
  const double ia = 1.0 / alpha;
  const double d2 = gamma_fn(2.0 - ia) / alpha;
  const double d_beta = gamma_fn(beta + 1.0 - ia) / alpha;
  const double H = C * std::pow(2.0 * Cp, 1.0 / (alpha * (1.0 + beta))) / 2.0;

  const double tail_term = 4.0 * d2 * std::pow(C, ia) / std::pow(T, 1.0 - ia);
  const double second_order_term =
      2.0 * Cp * d_beta / (std::pow(C, beta + 1.0 - ia) * std::pow(T, beta - ia));
  const double cutoff = std::pow(2.0 * Cp * T, 1.0 / ((1.0 + beta) * alpha));
  const double bulk_term = 2.0 * cutoff * std::exp(-H * std::pow(T, beta / (beta + 1.0)));
  return tail_term + second_order_term + bulk_term;
}

TailSpec power_transform(const TailSpec& tail, double r) {
  require(r > 0.0, "power_transform requires r > 0");
  TailSpec out = tail;
  out.alpha = tail.alpha / r;
  return out;
}

MaxBounds high_prob_bounds(double T, double delta, double alpha, double C) {
  require(delta > 0.0 && delta < 1.0, "high_prob_bounds requires delta in (0, 1)");
  require(T >= 1.0, "high_prob_bounds requires T >= 1");
  require(alpha > 0.0 && C > 0.0, "high_prob_bounds requires alpha > 0 and C > 0");
  const double ia = 1.0 / alpha;
  const double lower = std::pow(T * C / (2.0 * std::log(1.0 / delta)), ia);
  const double upper = std::pow(4.0 * T * C / -std::log1p(-delta), ia);
  return {lower, upper};
}

bool validate_second_order(const std::function<double(double)>& cdf, const TailSpec& tail,
                           std::span<const double> grid) {
  return std::all_of(grid.begin(), grid.end(), [&](double x) {
    if (x < 0.0) throw std::invalid_argument("validation grid points must be nonnegative");
    const double deviation = std::abs(1.0 - tail.C * std::pow(x, -tail.alpha) - cdf(x));
    const double allowed = tail.Cprime * std::pow(x, -tail.alpha * (1.0 + tail.beta));
    // Slack of a few ulps so an exact member is not rejected on rounding noise.
    return deviation <= allowed + 8.0 * std::numeric_limits<double>::epsilon();
  });
}

std::vector<double> default_validation_grid(double x_min, std::size_t points) {
  require(x_min > 0.0, "validation grid needs a positive lower end");
  require(points >= 2, "validation grid needs at least two points");
  std::vector<double> grid(points);
  const double step = std::log(1e6) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = x_min * std::exp(step * static_cast<double>(i));
  grid.front() = x_min;
  return grid;
}

}  // namespace xbandit
