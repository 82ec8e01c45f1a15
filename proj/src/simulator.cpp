#include "xbandit/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace xbandit {

void BanditInstance::validate() const {
  if (arms.empty()) throw std::invalid_argument("a bandit instance needs at least one arm");
  if (arms.size() < 2) return;
  std::vector<double> alphas;
  for (const auto& a : arms) alphas.push_back(a.alpha());
  std::sort(alphas.begin(), alphas.end());
  if (!(alphas[1] > alphas[0]))
    throw std::invalid_argument("the smallest tail index must be unique (alpha_(1) < alpha_(2))");
}

std::vector<TailSpec> BanditInstance::tail_specs() const {
  std::vector<TailSpec> out;
  out.reserve(arms.size());
  for (const auto& a : arms) out.push_back(a.tail());
  return out;
}

BestArmReport best_arm(const BanditInstance& instance, double n) {
  instance.validate();
  BestArmReport report{0, 0, true, {}};
  double best_v = -1.0;
  for (ArmId k = 0; k < instance.size(); ++k) {
    const auto& arm = instance.arms[k];
    if (arm.alpha() < instance.arms[report.arm].alpha()) report.arm = k;
    const double v = frechet_value(n, arm.alpha(), arm.scale());
    if (v > best_v) {
      best_v = v;
      report.frechet_arm = k;
    }
  }
  report.agrees = report.arm == report.frechet_arm;
  if (!report.agrees) {
    report.diagnostic = "smallest tail index is arm " + std::to_string(report.arm + 1) +
                        " but the Frechet value is largest for arm " +
                        std::to_string(report.frechet_arm + 1) + " at n = " + std::to_string(n) +
                        "; the horizon is below the regime where the two agree";
  }
  return report;
}

double oracle_expected_max(const BanditInstance& instance, double n) {
  const auto& arm = instance.arms[best_arm(instance, n).arm];
  return expected_max_exact(n, arm.alpha(), arm.scale());
}

RewardTable::RewardTable(const BanditInstance& instance, std::uint64_t seed) : instance_(&instance) {
  streams_.reserve(instance.size());
  for (ArmId k = 0; k < instance.size(); ++k) streams_.emplace_back(derive_seed(seed, k));
}

double conditional_expected_max(const BanditInstance& instance, double b, std::span<const std::size_t> counts) {
  if (counts.size() != instance.size()) throw std::invalid_argument("one count per arm expected");
  double lo = b;
  double scale = 0.0;
  bool any = false;
  for (ArmId k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) continue;
    any = true;
    const auto& arm = instance.arms[k];
    lo = std::max(lo, arm.support_min());
    scale = std::max(scale, std::pow(static_cast<double>(counts[k]) * arm.scale(), 1.0 / arm.alpha()));
  }
  if (!any) return b;

  // P(max of fresh draws > x) = -expm1(sum_k c_k log1p(-C_k x^-alpha_k)) for x >= lo.
  auto exceed = [&](double x) {
    double log_cdf = 0.0;
    for (ArmId k = 0; k < counts.size(); ++k) {
      if (counts[k] == 0) continue;
      const auto& arm = instance.arms[k];
      const double survive = arm.scale() * std::pow(x, -arm.alpha());
      if (survive >= 1.0) return 1.0;
      log_cdf += static_cast<double>(counts[k]) * std::log1p(-survive);
    }
    return -std::expm1(log_cdf);
  };

  constexpr double kTol = 1e-10;
  const double split = std::max(lo, scale);
  double bulk = 0.0;
  if (split > lo) {
    static thread_local boost::math::quadrature::tanh_sinh<double> finite;
    bulk = finite.integrate(exceed, lo, split, kTol);
  }
  static thread_local boost::math::quadrature::exp_sinh<double> half_line;
  const double tail = half_line.integrate(exceed, split, std::numeric_limits<double>::infinity(), kTol);
  return lo + bulk + tail;
}

EpisodeResult run_episode(const BanditInstance& instance, Policy& policy, std::size_t n, std::uint64_t seed,
                          const RecordingOptions& recording) {
  if (n == 0) throw std::invalid_argument("horizon must be at least 1");
  if (policy.arms() != instance.size()) throw std::invalid_argument("policy and instance disagree on K");
  if (policy.rounds_played() != 0) throw std::invalid_argument("run_episode needs a fresh policy");

  const auto started = std::chrono::steady_clock::now();
  const std::size_t K = instance.size();
  const RewardTable table(instance, seed);

  EpisodeResult out;
  out.horizon = n;
  out.initialization_rounds = policy.initialization_rounds();
  if (recording.grid.empty()) {
    out.grid.resize(n);
    std::iota(out.grid.begin(), out.grid.end(), std::size_t{1});
  } else {
    out.grid = recording.grid;
    if (!std::is_sorted(out.grid.begin(), out.grid.end()) || out.grid.front() == 0 || out.grid.back() > n)
      throw std::invalid_argument("recording grid must be sorted within [1, n]");
  }
  out.grid_max.reserve(out.grid.size());
  out.grid_conditional_max.reserve(out.grid.size());
  if (recording.keep_trajectory) {
    out.pulls.reserve(n);
    out.running_max.reserve(n);
  }

  const std::optional<std::size_t> tau = policy.reward_independent_after();
  std::vector<std::size_t> counts(K, 0);
  std::vector<std::size_t> counts_at_tau(K, 0);
  std::vector<std::size_t> fresh(K, 0);
  double max_at_tau = 0.0;
  double running = -std::numeric_limits<double>::infinity();
  std::size_t next = 0;
  std::uint64_t ops_at_init = policy.estimator_ops();

  auto snapshot = [&](std::size_t t) {
    out.grid_max.push_back(running);
    if (tau && t > *tau) {
      for (ArmId k = 0; k < K; ++k) fresh[k] = counts[k] - counts_at_tau[k];
      out.grid_conditional_max.push_back(conditional_expected_max(instance, max_at_tau, fresh));
    } else {
      out.grid_conditional_max.push_back(running);
    }
  };

  if (tau && *tau == 0) max_at_tau = 0.0;
  for (std::size_t t = 1; t <= n; ++t) {
    const ArmId arm = policy.select(t);
    if (arm >= K) throw std::logic_error("policy selected an arm out of range");
    const double x = table.at(arm, counts[arm]);
    ++counts[arm];
    policy.update(arm, x);
    running = std::max(running, x);
    if (recording.keep_trajectory) {
      out.pulls.push_back(arm);
      out.running_max.push_back(running);
    }
    if (tau && t == *tau) {
      counts_at_tau = counts;
      max_at_tau = running;
    }
    if (t == out.initialization_rounds) ops_at_init = policy.estimator_ops();
    while (next < out.grid.size() && out.grid[next] == t) {
      snapshot(t);
      ++next;
    }
  }

  out.pull_counts = std::move(counts);
  out.winner = policy.winner();
  out.estimator_ops = policy.estimator_ops();
  out.estimator_ops_after_init = out.initialization_rounds >= n ? 0 : out.estimator_ops - ops_at_init;
  out.final_max = running;
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

std::string_view to_string(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::extreme_etc: return "extreme-etc";
    case PolicyKind::extreme_hunter: return "extreme-hunter";
    case PolicyKind::robust_ucb: return "robust-ucb";
    case PolicyKind::uniform: return "uniform";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (PolicyKind k : {PolicyKind::extreme_etc, PolicyKind::extreme_hunter, PolicyKind::robust_ucb,
                       PolicyKind::uniform}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown policy '" + std::string(name) +
                              "' (expected extreme-etc, extreme-hunter, robust-ucb or uniform)");
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, std::size_t arms, std::size_t horizon,
                                    std::uint64_t seed) {
  switch (spec.kind) {
    case PolicyKind::extreme_etc:
      return std::make_unique<ExtremeETC>(arms, horizon, spec.N, spec.estimator);
    case PolicyKind::extreme_hunter:
      return std::make_unique<ExtremeHunter>(arms, horizon, spec.N, spec.estimator);
    case PolicyKind::robust_ucb:
      spec.reduction.validate();
      return std::make_unique<CensoredRewards>(
          std::make_unique<RobustUCB>(arms, spec.reduction.eps, spec.reduction.v), spec.reduction.u);
    case PolicyKind::uniform:
      return std::make_unique<UniformRandom>(arms, derive_seed(seed, ~std::uint64_t{0}));
  }
  throw std::invalid_argument("unknown policy kind");
}

std::vector<EpisodeResult> run_batch(const BanditInstance& instance, const PolicySpec& spec, std::size_t n,
                                     std::size_t replicates, std::uint64_t master_seed, std::size_t parallelism,
                                     const RecordingOptions& recording) {
  if (replicates == 0) throw std::invalid_argument("replicates must be at least 1");
  instance.validate();
  // Configuration errors surface here, before any round is played.
  make_policy(spec, instance.size(), n, master_seed);

  std::vector<EpisodeResult> results(replicates);
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  std::size_t failed_replicate = 0;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= replicates) return;
      try {
        const std::uint64_t seed = replicate_seed(master_seed, i);
        auto policy = make_policy(spec, instance.size(), n, seed);
        results[i] = run_episode(instance, *policy, n, seed, recording);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure || i < failed_replicate) {
          failure = std::current_exception();
          failed_replicate = i;
        }
        next.store(replicates);
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(parallelism, 1, replicates);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      throw std::runtime_error("replicate " + std::to_string(failed_replicate) + ": " + e.what());
    }
  }
  return results;
}

std::string_view to_string(RegretEstimator e) noexcept {
  return e == RegretEstimator::conditional ? "conditional" : "empirical";
}

RegretEstimator parse_regret_estimator(std::string_view name) {
  if (name == "conditional") return RegretEstimator::conditional;
  if (name == "empirical") return RegretEstimator::empirical;
  throw std::invalid_argument("unknown regret estimator '" + std::string(name) +
                              "' (expected conditional or empirical)");
}

RegretCurve aggregate_regret(std::span<const EpisodeResult> results, const std::function<double(double)>& oracle,
                             RegretEstimator estimator) {
  if (results.empty()) throw std::invalid_argument("aggregate_regret needs at least one result");
  const auto& grid = results.front().grid;
  for (const auto& r : results) {
    if (r.grid != grid || r.horizon != results.front().horizon)
      throw std::invalid_argument("results must share horizon and grid");
  }

  RegretCurve curve;
  curve.t = grid;
  curve.replicates = results.size();
  curve.mean_regret.resize(grid.size());
  curve.stderr_regret.resize(grid.size());
  const double R = static_cast<double>(results.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double target = oracle(static_cast<double>(grid[g]));
    // Welford in replicate order keeps the result independent of scheduling.
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t count = 0;
    for (const auto& r : results) {
      const double g_t = estimator == RegretEstimator::conditional ? r.grid_conditional_max[g] : r.grid_max[g];
      const double x = target - g_t;
      ++count;
      const double delta = x - mean;
      mean += delta / static_cast<double>(count);
      m2 += delta * (x - mean);
    }
    curve.mean_regret[g] = mean;
    curve.stderr_regret[g] = count > 1 ? std::sqrt(m2 / (R - 1.0) / R) : 0.0;
  }
  return curve;
}

std::vector<std::size_t> regret_time_grid(std::size_t n, std::span<const std::size_t> forced, std::size_t points) {
  if (n == 0) throw std::invalid_argument("horizon must be at least 1");
  std::vector<std::size_t> grid;
  grid.reserve(points + forced.size() + 1);
  if (points >= 2) {
    const double step = std::log(static_cast<double>(n)) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
      const double t = std::round(std::exp(step * static_cast<double>(i)));
      grid.push_back(std::clamp<std::size_t>(static_cast<std::size_t>(t), 1, n));
    }
  }
  grid.push_back(n);
  for (std::size_t t : forced) {
    if (t >= 1 && t <= n) grid.push_back(t);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

SlopeFit loglog_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("loglog_fit needs paired samples");
  std::vector<double> lx;
  std::vector<double> ly;
  SlopeFit fit;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      ++fit.dropped;
      continue;
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  fit.points = lx.size();
  if (fit.points < 3)
    throw std::invalid_argument("log-log fit needs at least 3 positive points, got " + std::to_string(fit.points));

  const double m = static_cast<double>(fit.points);
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("log-log fit needs at least two distinct abscissae");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  // A flat series has no variance to explain.
  if (syy <= 1e-24 * std::max(1.0, my * my)) {
    fit.slope = 0.0;
    fit.intercept = my;
    fit.r2 = 0.0;
    fit.degenerate = true;
    return fit;
  }
  fit.r2 = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return fit;
}

SlopeFit loglog_slope(const RegretCurve& curve, double t_min, double t_max) {
  if (!(t_min <= t_max)) throw std::invalid_argument("regression window must satisfy t_min <= t_max");
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < curve.t.size(); ++i) {
    const double t = static_cast<double>(curve.t[i]);
    if (t < t_min || t > t_max) continue;
    x.push_back(t);
    y.push_back(curve.mean_regret[i]);
  }
  return loglog_fit(x, y);
}

}  // namespace xbandit
