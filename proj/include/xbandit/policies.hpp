#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <string_view>
#include <vector>

#include "xbandit/estimators.hpp"
#include "xbandit/rng.hpp"

namespace xbandit {

/// Zero-based arm index. User-facing outputs number arms from 1.
using ArmId = std::size_t;

/// Arm-selection agent. Rounds are 1-based; every select(t) must be followed by
/// update(arm, reward) for the arm returned before select(t + 1).
class Policy {
 public:
  explicit Policy(std::size_t arms);
  virtual ~Policy() = default;
  Policy(const Policy&) = delete;
  Policy& operator=(const Policy&) = delete;

  virtual std::string_view name() const noexcept = 0;
  virtual ArmId select(std::size_t t) = 0;
  void update(ArmId arm, double reward);

  std::size_t arms() const noexcept { return counts_.size(); }
  std::span<const std::size_t> pull_counts() const noexcept { return counts_; }
  std::size_t rounds_played() const noexcept { return rounds_; }
  virtual std::uint64_t estimator_ops() const noexcept { return ops_.visits; }

  /// Number of leading rounds spent on forced initialization pulls.
  virtual std::size_t initialization_rounds() const noexcept { return 0; }

  /// Round tau after which selections no longer depend on observed rewards.
  /// Fixed for the lifetime of the policy; nullopt when there is none.
  virtual std::optional<std::size_t> reward_independent_after() const noexcept { return std::nullopt; }

  /// Arm fixed by a committing policy once it has committed.
  virtual std::optional<ArmId> winner() const noexcept { return std::nullopt; }

 protected:
  virtual void observe(ArmId arm, double reward) = 0;
  OpCounter ops_;

 private:
  std::vector<std::size_t> counts_;
  std::size_t rounds_ = 0;
};

/// Gamma(x) for x > 0, +inf otherwise.
double optimistic_gamma(double x);

/// Gamma~(1 - h - l1) * ((C + l2) n)^(h + l1).
double optimistic_index(double h, double lambda_1, double C_hat, double lambda_2, double n);

/// Index of one arm from its estimate after T pulls; +inf for degenerate estimates.
double index_B(const TailEstimate& est, double T, double n, const EstimatorConfig& cfg, double delta0);

/// Argmax with the exploration tie rule: among +inf indices the least-pulled arm
/// (then lowest id) wins; among finite maxima the lowest id wins.
ArmId select_max_index(std::span<const double> indices, std::span<const std::size_t> counts);

/// Shared state of the two index policies: block initialization (arm 1 x N,
/// arm 2 x N, ...) followed by index computation at round K N.
class TailIndexPolicy : public Policy {
 public:
  TailIndexPolicy(std::size_t arms, std::size_t horizon, std::size_t N, EstimatorConfig cfg);

  std::size_t initialization_rounds() const noexcept override { return arms() * N_; }
  std::span<const double> indices() const noexcept { return indices_; }
  std::span<const TailEstimate> estimates() const noexcept { return estimates_; }
  std::size_t pulls_per_arm() const noexcept { return N_; }
  double confidence_level() const noexcept { return delta0_; }

 protected:
  ArmId initialization_arm(std::size_t t) const noexcept { return (t - 1) / N_; }
  void refresh_index(ArmId arm);

  std::size_t horizon_;
  std::size_t N_;
  EstimatorConfig cfg_;
  double delta0_;
  std::vector<std::vector<double>> samples_;
  std::vector<TailEstimate> estimates_;
  std::vector<double> indices_;
};

/// Explore-then-commit: N pulls per arm, one index evaluation, then the argmax
/// arm for the rest of the horizon.
class ExtremeETC final : public TailIndexPolicy {
 public:
  ExtremeETC(std::size_t arms, std::size_t horizon, std::size_t N, EstimatorConfig cfg);

  std::string_view name() const noexcept override { return "extreme-etc"; }
  ArmId select(std::size_t t) override;
  std::optional<std::size_t> reward_independent_after() const noexcept override {
    return initialization_rounds();
  }
  std::optional<ArmId> winner() const noexcept override { return winner_; }

 private:
  void observe(ArmId arm, double reward) override;
  std::optional<ArmId> winner_;
};

/// Optimistic index policy recomputing the last pulled arm's estimate from its
/// full sample log each round.
class ExtremeHunter final : public TailIndexPolicy {
 public:
  ExtremeHunter(std::size_t arms, std::size_t horizon, std::size_t N, EstimatorConfig cfg);

  std::string_view name() const noexcept override { return "extreme-hunter"; }
  ArmId select(std::size_t t) override;

 private:
  void observe(ArmId arm, double reward) override;
};

/// Truncation level (v j / ln(t^2))^(1/(1+eps)) for the j-th sample of an arm at round t.
double truncation_level(double v, double eps, std::size_t j, std::size_t t);
/// Exploration bonus 4 v^(1/(1+eps)) (ln(t^2) / T)^(eps/(1+eps)).
double robust_bonus(double v, double eps, std::size_t T, std::size_t t);

/// Robust UCB with the truncated empirical mean. Feed it censored rewards.
///
/// Sample j of an arm stays in the truncated sum while ln(t^2) <= v j / Y_j^(1+eps);
/// since ln(t^2) only grows, each sample leaves at most once and the per-arm
/// means are maintained with a min-heap instead of a rescan.
class RobustUCB final : public Policy {
 public:
  RobustUCB(std::size_t arms, double eps, double v);

  std::string_view name() const noexcept override { return "robust-ucb"; }
  ArmId select(std::size_t t) override;
  std::size_t initialization_rounds() const noexcept override { return arms(); }

  /// Truncated mean of `arm` as used at round t (t > number of arms).
  double truncated_mean(ArmId arm, std::size_t t);
  std::span<const double> indices() const noexcept { return indices_; }

 private:
  void observe(ArmId arm, double reward) override;
  void drop_expired(ArmId arm, double log_t2);

  struct Kept {
    double expiry;  ///< v j / Y^(1+eps); kept while ln(t^2) <= expiry
    double value;
    bool operator>(const Kept& o) const noexcept { return expiry > o.expiry; }
  };
  using MinHeap = std::priority_queue<Kept, std::vector<Kept>, std::greater<>>;

  double eps_;
  double v_;
  std::vector<MinHeap> kept_;
  std::vector<double> kept_sum_;
  std::vector<double> indices_;
};

/// Uniformly random arm from the policy's own stream.
class UniformRandom final : public Policy {
 public:
  UniformRandom(std::size_t arms, std::uint64_t seed);

  std::string_view name() const noexcept override { return "uniform"; }
  ArmId select(std::size_t t) override;
  std::optional<std::size_t> reward_independent_after() const noexcept override { return 0; }

 private:
  void observe(ArmId, double) override {}
  SplitMix64 rng_;
};

}  // namespace xbandit
