#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xbandit/distributions.hpp"
#include "xbandit/estimators.hpp"
#include "xbandit/policies.hpp"
#include "xbandit/reduction.hpp"
#include "xbandit/rng.hpp"

namespace xbandit {

struct BanditInstance {
  std::vector<ExactPareto> arms;

  std::size_t size() const noexcept { return arms.size(); }
  /// K >= 1 and, for K >= 2, a unique smallest tail index.
  void validate() const;
  /// Exact-member tail descriptions (beta = inf, C' = 0).
  std::vector<TailSpec> tail_specs() const;
};

struct BestArmReport {
  ArmId arm;           ///< argmin alpha
  ArmId frechet_arm;   ///< argmax frechet_value(n, alpha_k, C_k)
  bool agrees;
  std::string diagnostic;  ///< empty when the two agree
};

/// Optimal arm for the max-bandit objective; flags horizons where the Frechet
/// ranking has not yet settled on the smallest tail index.
BestArmReport best_arm(const BanditInstance& instance, double n);

/// E[G_n] of always pulling the best arm (exact order-statistics value).
double oracle_expected_max(const BanditInstance& instance, double n);

/// The i.i.d. reward table {X_{k,i}}: entry (k, i) is the reward of the i-th pull
/// (0-based) of arm k, a pure function of (seed, k, i). Two policies run on one
/// seed therefore see identical rewards on their i-th pull of each arm.
class RewardTable {
 public:
  RewardTable(const BanditInstance& instance, std::uint64_t seed);
  double at(ArmId arm, std::uint64_t pull_index) const noexcept {
    return instance_->arms[arm].quantile(streams_[arm].uniform_at(pull_index));
  }

 private:
  const BanditInstance* instance_;
  std::vector<CounterStream> streams_;
};

/// E[max(b, max_k M_k)] where M_k is the max of counts[k] fresh draws of arm k.
double conditional_expected_max(const BanditInstance& instance, double b,
                                std::span<const std::size_t> counts);

struct RecordingOptions {
  std::vector<std::size_t> grid;  ///< rounds at which to snapshot; empty means every round
  bool keep_trajectory = false;   ///< keep per-round pulls and running maxima
};

struct EpisodeResult {
  std::size_t horizon = 0;
  std::vector<ArmId> pulls;          ///< per round, when kept
  std::vector<double> running_max;   ///< per round, when kept
  std::vector<std::size_t> grid;
  std::vector<double> grid_max;      ///< G_t at grid rounds
  /// E[G_t | history through round tau and the pull schedule] at grid rounds,
  /// tau from Policy::reward_independent_after; equals grid_max without tau.
  std::vector<double> grid_conditional_max;
  std::vector<std::size_t> pull_counts;
  std::optional<ArmId> winner;
  std::size_t initialization_rounds = 0;
  std::uint64_t estimator_ops = 0;
  std::uint64_t estimator_ops_after_init = 0;
  double final_max = 0.0;
  double wall_seconds = 0.0;
};

EpisodeResult run_episode(const BanditInstance& instance, Policy& policy, std::size_t n,
                          std::uint64_t seed, const RecordingOptions& recording = {});

enum class PolicyKind { extreme_etc, extreme_hunter, robust_ucb, uniform };

std::string_view to_string(PolicyKind kind) noexcept;
/// Parses the CLI names (extreme-etc, extreme-hunter, robust-ucb, uniform).
PolicyKind parse_policy_kind(std::string_view name);

struct PolicySpec {
  PolicyKind kind = PolicyKind::extreme_etc;
  std::size_t N = 1;             ///< pulls per arm before indices (index policies)
  EstimatorConfig estimator;
  ReductionConfig reduction;     ///< censoring threshold and moment parameters (robust-ucb)
};

/// Fresh policy for one episode; robust-ucb comes wrapped in CensoredRewards.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, std::size_t arms, std::size_t horizon,
                                    std::uint64_t seed);

/// Seed of replicate i under master seed s.
inline std::uint64_t replicate_seed(std::uint64_t master, std::size_t replicate) noexcept {
  return derive_seed(master, replicate);
}

/// Independent replicates; output order and content do not depend on parallelism.
std::vector<EpisodeResult> run_batch(const BanditInstance& instance, const PolicySpec& spec, std::size_t n,
                                     std::size_t replicates, std::uint64_t master_seed,
                                     std::size_t parallelism, const RecordingOptions& recording = {});

struct RegretCurve {
  std::vector<std::size_t> t;
  std::vector<double> mean_regret;
  std::vector<double> stderr_regret;
  std::size_t replicates = 0;
};

enum class RegretEstimator {
  conditional,  ///< averages grid_conditional_max (same expectation, lower variance)
  empirical,    ///< averages the observed running maxima
};

std::string_view to_string(RegretEstimator e) noexcept;
RegretEstimator parse_regret_estimator(std::string_view name);

/// Mean over replicates of oracle(t) - G_t with standard errors, on the shared grid.
RegretCurve aggregate_regret(std::span<const EpisodeResult> results, const std::function<double(double)>& oracle,
                             RegretEstimator estimator = RegretEstimator::conditional);

/// 256 geometric rounds over [1, n] plus the forced rounds that fall in [1, n].
std::vector<std::size_t> regret_time_grid(std::size_t n, std::span<const std::size_t> forced = {},
                                          std::size_t points = 256);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
  std::size_t dropped = 0;  ///< nonpositive regret values skipped
  bool degenerate = false;  ///< zero variance in ln R; r2 reported as 0
};

/// OLS of ln R on ln t over grid rounds in [t_min, t_max]. Nonpositive values are
/// dropped; throws when fewer than three points remain.
SlopeFit loglog_slope(const RegretCurve& curve, double t_min, double t_max);
SlopeFit loglog_fit(std::span<const double> x, std::span<const double> y);

}  // namespace xbandit
