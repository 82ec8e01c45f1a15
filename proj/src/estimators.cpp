#include "xbandit/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace xbandit {

double EstimatorConfig::confidence_level(double n) const {
  const double level = delta0 ? *delta0 : std::pow(n, -rho);
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("confidence level delta0 must lie in (0, 1)");
  return level;
}

void EstimatorConfig::validate() const {
  if (!(b > 0.0)) throw std::invalid_argument("b must be positive");
  if (!(D > 0.0) || !(E > 0.0)) throw std::invalid_argument("D and E must be positive");
  if (!(A0 > 0.0)) throw std::invalid_argument("A0 must be positive");
  if (delta0 && !(*delta0 > 0.0 && *delta0 < 1.0))
    throw std::invalid_argument("delta0 must lie in (0, 1)");
  if (!delta0 && !(rho > 0.0)) throw std::invalid_argument("rho must be positive");
}

AlphaAtLevel estimate_alpha_at(std::span<const double> samples, double r) {
  if (samples.empty()) throw std::invalid_argument("estimate_alpha_at needs samples");
  const double low = std::exp(r);
  const double high = std::exp(r + 1.0);
  AlphaAtLevel out;
  for (double x : samples) {
    if (x > low) ++out.above_low;
    if (x > high) ++out.above_high;
  }
  out.defined = out.above_high > 0;
  if (out.defined)
    out.alpha = std::log(static_cast<double>(out.above_low) / static_cast<double>(out.above_high));
  return out;
}

namespace {

struct Level {
  std::size_t j;
  double threshold;
  std::size_t above_low;
  std::size_t above_high;
  double alpha;
  double h;
  double half_width;
};

}  // namespace

ThresholdChoice select_r(std::span<const double> samples, double delta, OpCounter* ops) {
  if (samples.empty()) throw std::invalid_argument("select_r needs samples");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("select_r needs delta in (0, 1)");

  const std::size_t T = samples.size();
  const int log2_T = std::bit_width(T) - 1;
  const int J = log2_T - 2;
  if (ops) ops->add(T);
  if (J < 1) return {};

  std::vector<double> buf(samples.begin(), samples.end());
  const double log_inv_delta = std::log(1.0 / delta);
  std::vector<Level> usable;
  usable.reserve(static_cast<std::size_t>(J));

  // Nested selections: after level j, [pos_j + 1, T) holds exactly the values
  // above the level-j order statistic, so the next selection runs on that suffix.
  std::size_t lo = 0;
  for (int j = 1; j <= J; ++j) {
    const std::size_t top = T >> j;
    const std::size_t pos = T - top - 1;
    std::nth_element(buf.begin() + static_cast<std::ptrdiff_t>(lo),
                     buf.begin() + static_cast<std::ptrdiff_t>(pos), buf.end());
    if (ops) ops->add(T - lo + top);
    lo = pos + 1;

    const double q = buf[pos];
    if (!(q > 0.0)) continue;
    const double high = std::exp(1.0) * q;
    std::size_t above_low = 0;
    std::size_t above_high = 0;
    for (std::size_t i = pos + 1; i < T; ++i) {
      above_low += buf[i] > q;
      above_high += buf[i] > high;
    }
    if (above_high == 0 || above_high == above_low) continue;
    const double alpha = std::log(static_cast<double>(above_low) / static_cast<double>(above_high));
    usable.push_back({static_cast<std::size_t>(j), q, above_low, above_high, alpha, 1.0 / alpha,
                      kLepskiKappa * std::sqrt(log_inv_delta / static_cast<double>(above_low))});
  }

  if (usable.empty()) return {};

  auto to_choice = [](const Level& l, ThresholdStatus status) {
    return ThresholdChoice{std::log(l.threshold), l.alpha, l.j, l.above_low, status};
  };

  for (std::size_t i = 0; i + 1 < usable.size(); ++i) {
    const bool consistent = std::all_of(usable.begin() + static_cast<std::ptrdiff_t>(i) + 1, usable.end(),
                                        [&](const Level& coarser) {
                                          return std::abs(usable[i].h - coarser.h) <= coarser.half_width;
                                        });
    if (consistent) return to_choice(usable[i], ThresholdStatus::stabilized);
  }

  const double middle = (static_cast<double>(J) + 1.0) / 2.0;
  const auto nearest = std::min_element(usable.begin(), usable.end(), [&](const Level& a, const Level& b) {
    return std::abs(static_cast<double>(a.j) - middle) < std::abs(static_cast<double>(b.j) - middle);
  });
  return to_choice(*nearest, ThresholdStatus::fallback);
}

double clip_h(double alpha) noexcept { return alpha > 0.0 ? std::min(1.0 / alpha, 1.0) : 1.0; }

double estimate_h(std::span<const double> samples, double delta) {
  const ThresholdChoice choice = select_r(samples, delta);
  if (choice.status == ThresholdStatus::degenerate) return 1.0;
  return clip_h(choice.alpha);
}

double estimate_C(std::span<const double> samples, double b, double h, OpCounter* ops) {
  if (samples.empty()) throw std::invalid_argument("estimate_C needs samples");
  if (!(b > 0.0)) throw std::invalid_argument("estimate_C needs b > 0");
  if (!(h >= 0.0 && h <= 1.0)) throw std::invalid_argument("estimate_C needs h in [0, 1]");
  const double T = static_cast<double>(samples.size());
  const double threshold = std::pow(T, h / (2.0 * b + 1.0));
  const auto count = std::count_if(samples.begin(), samples.end(), [&](double x) { return x >= threshold; });
  if (ops) ops->add(samples.size());
  return std::pow(T, -2.0 * b / (2.0 * b + 1.0)) * static_cast<double>(count);
}

TailEstimate estimate_tail(std::span<const double> samples, double delta, double b, OpCounter* ops) {
  const ThresholdChoice choice = select_r(samples, delta, ops);
  TailEstimate est;
  est.T = samples.size();
  est.degenerate = choice.status == ThresholdStatus::degenerate;
  est.alpha_hat = choice.alpha;
  est.h = est.degenerate ? 1.0 : clip_h(choice.alpha);
  est.C_hat = estimate_C(samples, b, est.h, ops);
  return est;
}

double lambda1(double T, const EstimatorConfig& cfg, double delta0) {
  if (!(T >= 1.0)) throw std::invalid_argument("lambda1 needs T >= 1");
  return cfg.D * std::sqrt(std::log(1.0 / delta0)) * std::pow(T, -cfg.b / (2.0 * cfg.b + 1.0));
}

double lambda2(double T, const EstimatorConfig& cfg, double delta0) {
  if (!(T >= 1.0)) throw std::invalid_argument("lambda2 needs T >= 1");
  return cfg.E * std::sqrt(std::log(T / delta0)) * std::log(T) *
         std::pow(T, -cfg.b / (2.0 * cfg.b + 1.0));
}

double delta0_of(double n, double alpha_star) {
  if (!(alpha_star > 1.0)) throw std::domain_error("delta0 needs alpha* > 1");
  if (!(n >= 2.0)) throw std::invalid_argument("delta0 needs n >= 2");
  return std::pow(n, -2.0 * alpha_star / (alpha_star - 1.0));
}

std::size_t required_pulls_N(double n, const EstimatorConfig& cfg) {
  if (!(n >= 3.0)) throw std::invalid_argument("required_pulls_N needs n >= 3");
  if (!(cfg.b > 0.0) || !(cfg.A0 > 0.0)) throw std::invalid_argument("required_pulls_N needs b, A0 > 0");
  const double exponent = 2.0 * (2.0 * cfg.b + 1.0) / cfg.b;
  const double N = std::ceil(cfg.A0 * std::pow(std::log(n), exponent));
  return std::max<std::size_t>(1, static_cast<std::size_t>(N));
}

}  // namespace xbandit
