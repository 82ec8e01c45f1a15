#include "xbandit/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace xbandit {

void ReductionConfig::validate() const {
  if (!(u >= 0.0)) throw std::invalid_argument("censoring threshold u must be nonnegative");
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("eps must lie in (0, 1]");
  if (!(v > 0.0)) throw std::invalid_argument("v must be positive");
}

double threshold_lower_bound(std::span<const TailSpec> arms) {
  if (arms.size() < 2) throw std::invalid_argument("threshold_lower_bound needs at least two arms");
  double min_C = arms.front().C;
  double max_C = arms.front().C;
  double max_Cp = 0.0;
  double min_beta = kInfiniteBeta;
  std::vector<double> alphas;
  alphas.reserve(arms.size());
  for (const TailSpec& t : arms) {
    t.validate();
    min_C = std::min(min_C, t.C);
    max_C = std::max(max_C, t.C);
    max_Cp = std::max(max_Cp, t.Cprime);
    min_beta = std::min(min_beta, t.beta);
    alphas.push_back(t.alpha);
  }
  std::partial_sort(alphas.begin(), alphas.begin() + 2, alphas.end());
  const double a1 = alphas[0];
  const double a2 = alphas[1];
  if (!(a2 > a1))
    throw std::invalid_argument("threshold_lower_bound needs a unique smallest tail index");

  const double second_order = std::isfinite(min_beta) ? std::pow(2.0 * max_Cp / min_C, 1.0 / min_beta) : 1.0;
  const double separation = std::pow(3.0 * max_C / min_C, 1.0 / (a2 - a1));
  return std::max({1.0, second_order, separation});
}

double censored_mean(const ExactPareto& arm, double u) {
  if (u < arm.support_min())
    throw std::invalid_argument("censored_mean needs u at or above the support minimum");
  const double a = arm.alpha();
  return arm.scale() * a / (a - 1.0) * std::pow(u, 1.0 - a);
}

double censored_moment(const ExactPareto& arm, double eps, double u) {
  const double a = arm.alpha();
  if (!(1.0 + eps < a)) throw std::domain_error("moment of order 1 + eps is infinite for this arm");
  const double level = std::max(u, arm.support_min());
  return arm.scale() * a / (a - 1.0 - eps) * std::pow(level, -(a - 1.0 - eps));
}

double moment_bound_v(std::span<const ExactPareto> arms, double eps, double u) {
  if (arms.empty()) throw std::invalid_argument("moment_bound_v needs arms");
  if (!(eps >= 0.0)) throw std::invalid_argument("moment_bound_v needs eps >= 0");
  double v = 0.0;
  for (const ExactPareto& arm : arms) v = std::max(v, censored_moment(arm, eps, u));
  return v;
}

CensoredRewards::CensoredRewards(std::unique_ptr<Policy> inner, double u)
    : Policy(inner ? inner->arms() : 0), inner_(std::move(inner)), u_(u) {
  if (!(u >= 0.0)) throw std::invalid_argument("censoring threshold u must be nonnegative");
}

}  // namespace xbandit
