#pragma once

#include <memory>
#include <span>

#include "xbandit/distributions.hpp"
#include "xbandit/policies.hpp"

namespace xbandit {

struct ReductionConfig {
  double u = 0.0;    ///< censoring threshold
  double eps = 0.4;  ///< moment order is 1 + eps
  double v = 1.0;    ///< bound on max_k E[Y_k^(1+eps)]

  void validate() const;
};

/// x if x > u, else 0.
constexpr double censor(double x, double u) noexcept { return x > u ? x : 0.0; }

/// Lower bound on u above which the censored-mean best arm is the smallest-alpha arm:
///   max(1, (2C'/min C)^(1/min beta), (3 max C / min C)^(1/(alpha_(2) - alpha_(1)))).
/// C' is the largest second-order constant across arms; an infinite min beta makes
/// the middle term 1.
double threshold_lower_bound(std::span<const TailSpec> arms);

/// E[X 1{X > u}] for an exact Pareto arm: C alpha/(alpha - 1) u^(1 - alpha).
/// Requires u at or above the support minimum.
double censored_mean(const ExactPareto& arm, double u);

/// E[X^(1+eps) 1{X > u'}] with u' = max(u, support minimum).
double censored_moment(const ExactPareto& arm, double eps, double u);

/// max_k censored_moment: the smallest v meeting the moment condition.
double moment_bound_v(std::span<const ExactPareto> arms, double eps, double u);

/// Policy adapter that feeds censored rewards to the wrapped policy; the
/// environment keeps reporting raw rewards for regret.
class CensoredRewards final : public Policy {
 public:
  CensoredRewards(std::unique_ptr<Policy> inner, double u);

  std::string_view name() const noexcept override { return inner_->name(); }
  ArmId select(std::size_t t) override { return inner_->select(t); }
  std::uint64_t estimator_ops() const noexcept override { return inner_->estimator_ops(); }
  std::size_t initialization_rounds() const noexcept override { return inner_->initialization_rounds(); }
  std::optional<std::size_t> reward_independent_after() const noexcept override {
    return inner_->reward_independent_after();
  }
  std::optional<ArmId> winner() const noexcept override { return inner_->winner(); }

  double threshold() const noexcept { return u_; }
  Policy& inner() noexcept { return *inner_; }

 private:
  void observe(ArmId arm, double reward) override { inner_->update(arm, censor(reward, u_)); }

  std::unique_ptr<Policy> inner_;
  double u_;
};

}  // namespace xbandit
