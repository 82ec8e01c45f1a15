#include "xbandit/policies.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace xbandit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Policy::Policy(std::size_t arms) : counts_(arms, 0) {
  if (arms == 0) throw std::invalid_argument("a policy needs at least one arm");
}

void Policy::update(ArmId arm, double reward) {
  if (arm >= counts_.size()) throw std::out_of_range("arm id out of range");
  ++counts_[arm];
  ++rounds_;
  observe(arm, reward);
}

double optimistic_gamma(double x) { return x > 0.0 ? std::tgamma(x) : kInf; }

double optimistic_index(double h, double lambda_1, double C_hat, double lambda_2, double n) {
  const double shape = 1.0 - h - lambda_1;
  if (shape <= 0.0) return kInf;
  return optimistic_gamma(shape) * std::pow((C_hat + lambda_2) * n, h + lambda_1);
}

double index_B(const TailEstimate& est, double T, double n, const EstimatorConfig& cfg, double delta0) {
  if (!(T >= 1.0) || !(n >= 1.0)) throw std::invalid_argument("index_B needs T >= 1 and n >= 1");
  if (est.degenerate) return kInf;
  return optimistic_index(est.h, lambda1(T, cfg, delta0), est.C_hat, lambda2(T, cfg, delta0), n);
}

ArmId select_max_index(std::span<const double> indices, std::span<const std::size_t> counts) {
  if (indices.empty() || indices.size() != counts.size())
    throw std::invalid_argument("select_max_index needs matching, nonempty inputs");
  std::optional<ArmId> unresolved;
  for (ArmId k = 0; k < indices.size(); ++k) {
    if (indices[k] == kInf && (!unresolved || counts[k] < counts[*unresolved])) unresolved = k;
  }
  if (unresolved) return *unresolved;

  ArmId best = 0;
  double best_value = -kInf;
  for (ArmId k = 0; k < indices.size(); ++k) {
    if (indices[k] > best_value) {
      best_value = indices[k];
      best = k;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

TailIndexPolicy::TailIndexPolicy(std::size_t arms, std::size_t horizon, std::size_t N,
                                 EstimatorConfig cfg)
    : Policy(arms),
      horizon_(horizon),
      N_(N),
      cfg_(std::move(cfg)),
      samples_(arms),
      estimates_(arms),
      indices_(arms, kInf) {
  if (N_ == 0) throw std::invalid_argument("N must be at least 1");
  if (arms * N_ > horizon_)
    throw std::invalid_argument("initialization exceeds horizon: K*N = " + std::to_string(arms * N_) +
                                " > n = " + std::to_string(horizon_));
  cfg_.validate();
  delta0_ = cfg_.confidence_level(static_cast<double>(horizon_));
}

void TailIndexPolicy::refresh_index(ArmId arm) {
  const auto& log = samples_[arm];
  estimates_[arm] = estimate_tail(log, delta0_, cfg_.b, &ops_);
  indices_[arm] = index_B(estimates_[arm], static_cast<double>(log.size()),
                          static_cast<double>(horizon_), cfg_, delta0_);
}

ExtremeETC::ExtremeETC(std::size_t arms, std::size_t horizon, std::size_t N, EstimatorConfig cfg)
    : TailIndexPolicy(arms, horizon, N, std::move(cfg)) {
  for (auto& log : samples_) log.reserve(N_);
}

ArmId ExtremeETC::select(std::size_t t) {
  if (t <= initialization_rounds()) return initialization_arm(t);
  return *winner_;
}

void ExtremeETC::observe(ArmId arm, double reward) {
  if (winner_) return;
  samples_[arm].push_back(reward);
  if (rounds_played() == initialization_rounds()) {
    for (ArmId k = 0; k < arms(); ++k) refresh_index(k);
    winner_ = select_max_index(indices_, pull_counts());
    // Memory after commitment is O(1) in the horizon.
    for (auto& log : samples_) std::vector<double>().swap(log);
  }
}

ExtremeHunter::ExtremeHunter(std::size_t arms, std::size_t horizon, std::size_t N, EstimatorConfig cfg)
    : TailIndexPolicy(arms, horizon, N, std::move(cfg)) {}

ArmId ExtremeHunter::select(std::size_t t) {
  if (t <= initialization_rounds()) return initialization_arm(t);
  return select_max_index(indices_, pull_counts());
}

void ExtremeHunter::observe(ArmId arm, double reward) {
  samples_[arm].push_back(reward);
  const std::size_t t = rounds_played();
  if (t == initialization_rounds()) {
    for (ArmId k = 0; k < arms(); ++k) refresh_index(k);
  } else if (t > initialization_rounds()) {
    refresh_index(arm);
  }
}

// ---------------------------------------------------------------------------

double truncation_level(double v, double eps, std::size_t j, std::size_t t) {
  const double log_t2 = 2.0 * std::log(static_cast<double>(t));
  return std::pow(v * static_cast<double>(j) / log_t2, 1.0 / (1.0 + eps));
}

double robust_bonus(double v, double eps, std::size_t T, std::size_t t) {
  const double log_t2 = 2.0 * std::log(static_cast<double>(t));
  return 4.0 * std::pow(v, 1.0 / (1.0 + eps)) *
         std::pow(log_t2 / static_cast<double>(T), eps / (1.0 + eps));
}

RobustUCB::RobustUCB(std::size_t arms, double eps, double v)
    : Policy(arms), eps_(eps), v_(v), kept_(arms), kept_sum_(arms, 0.0), indices_(arms, kInf) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("robust-ucb needs eps in (0, 1]");
  if (!(v > 0.0)) throw std::invalid_argument("robust-ucb needs v > 0");
}

void RobustUCB::observe(ArmId arm, double reward) {
  if (reward <= 0.0) {
    kept_sum_[arm] += reward;  // never exceeds a positive truncation level
    return;
  }
  const double j = static_cast<double>(pull_counts()[arm]);
  kept_[arm].push({v_ * j / std::pow(reward, 1.0 + eps_), reward});
  kept_sum_[arm] += reward;
  ops_.add(1);
}

void RobustUCB::drop_expired(ArmId arm, double log_t2) {
  auto& heap = kept_[arm];
  while (!heap.empty() && heap.top().expiry < log_t2) {
    kept_sum_[arm] -= heap.top().value;
    heap.pop();
    ops_.add(1);
  }
  // Rebase to suppress cancellation drift once everything positive has left.
  if (heap.empty() && kept_sum_[arm] > 0.0) kept_sum_[arm] = 0.0;
}

double RobustUCB::truncated_mean(ArmId arm, std::size_t t) {
  const std::size_t T = pull_counts()[arm];
  if (T == 0) throw std::logic_error("truncated mean of an unpulled arm");
  drop_expired(arm, 2.0 * std::log(static_cast<double>(t)));
  return kept_sum_[arm] / static_cast<double>(T);
}

ArmId RobustUCB::select(std::size_t t) {
  if (t <= arms()) return t - 1;
  for (ArmId k = 0; k < arms(); ++k) {
    indices_[k] = truncated_mean(k, t) + robust_bonus(v_, eps_, pull_counts()[k], t);
  }
  ops_.add(arms());
  return select_max_index(indices_, pull_counts());
}

// ---------------------------------------------------------------------------

UniformRandom::UniformRandom(std::size_t arms, std::uint64_t seed) : Policy(arms), rng_(seed) {}

ArmId UniformRandom::select(std::size_t) { return static_cast<ArmId>(rng_.bounded(arms())); }

}  // namespace xbandit
