#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace xbandit {

/// Counts sample visits made by estimator passes. Used for the complexity
/// benchmark; one unit is one element touched by a linear scan or selection.
struct OpCounter {
  std::uint64_t visits = 0;
  void add(std::uint64_t n) noexcept { visits += n; }
};

/// A0 such that K N ~ 7000 at n = 1e5, b = 1, K = 3.
inline constexpr double kDefaultA0 = 1.0e-3;
/// Exponent in delta0 = n^-rho; 6 matches a best-arm tail index of 1.5.
inline constexpr double kDefaultRho = 6.0;

struct EstimatorConfig {
  double b = 1.0;  ///< known lower bound on every second-order exponent
  double D = 1.0;  ///< scale of the 1/alpha confidence width
  double E = 1.0;  ///< scale of the C confidence width
  double A0 = kDefaultA0;
  double rho = kDefaultRho;
  std::optional<double> delta0;  ///< overrides n^-rho when set

  /// delta0 for horizon n; throws when the result falls outside (0, 1).
  double confidence_level(double n) const;
  void validate() const;
};

struct AlphaAtLevel {
  double alpha = 0.0;
  std::size_t above_low = 0;   ///< #{X > e^r}
  std::size_t above_high = 0;  ///< #{X > e^(r+1)}
  bool defined = false;        ///< false when the upper count is zero
};

/// Count-ratio tail index estimate ln(#{X > e^r} / #{X > e^(r+1)}).
AlphaAtLevel estimate_alpha_at(std::span<const double> samples, double r);

enum class ThresholdStatus { stabilized, fallback, degenerate };

struct ThresholdChoice {
  double r = 0.0;
  double alpha = 0.0;
  std::size_t level = 0;       ///< 1-based quantile level j (threshold at quantile 1 - 2^-j)
  std::size_t exceedances = 0; ///< #{X > e^r}
  ThresholdStatus status = ThresholdStatus::degenerate;
};

/// Lepski interval constant.
inline constexpr double kLepskiKappa = 2.0;

/// Adaptive choice of the threshold level r.
///
/// Candidates are r_j = ln q_j with q_j the empirical quantile at level 1 - 2^-j,
/// j = 1 .. floor(log2 T) - 2. A level is usable when both counts of the ratio
/// estimator are positive. Each usable level carries the interval
///   1/alpha_j +- kappa * sqrt(ln(1/delta) / #{X > q_j})
/// and the smallest j whose 1/alpha_j lies inside the intervals of every larger
/// usable level (at least one) is chosen. Without such a level the usable level
/// nearest to the middle of the grid is returned with status `fallback`; with no
/// usable level at all the result is `degenerate`.
///
/// Runs in expected linear time via a chain of nested selections on a copy.
ThresholdChoice select_r(std::span<const double> samples, double delta, OpCounter* ops = nullptr);

/// min(1/alpha, 1), or 1 for alpha <= 0.
double clip_h(double alpha) noexcept;

/// h estimate through select_r; returns 1 on a degenerate selection.
double estimate_h(std::span<const double> samples, double delta);

/// T^(-2b/(2b+1)) * #{X >= T^(h/(2b+1))}.
double estimate_C(std::span<const double> samples, double b, double h, OpCounter* ops = nullptr);

struct TailEstimate {
  double h = 1.0;
  double alpha_hat = 0.0;
  double C_hat = 0.0;
  std::size_t T = 0;
  bool degenerate = true;  ///< no usable threshold level; indices treat this as maximally optimistic
};

/// Full per-arm estimate: threshold selection, h, then C from the same samples.
TailEstimate estimate_tail(std::span<const double> samples, double delta, double b,
                           OpCounter* ops = nullptr);

/// D sqrt(ln(1/delta0)) T^(-b/(2b+1)).
double lambda1(double T, const EstimatorConfig& cfg, double delta0);
/// E sqrt(ln(T/delta0)) ln(T) T^(-b/(2b+1)).
double lambda2(double T, const EstimatorConfig& cfg, double delta0);

/// n^(-2 alpha* / (alpha* - 1)).
double delta0_of(double n, double alpha_star);

/// ceil(A0 (ln n)^(2(2b+1)/b)), at least 1.
std::size_t required_pulls_N(double n, const EstimatorConfig& cfg);

}  // namespace xbandit
