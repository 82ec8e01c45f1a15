#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "xbandit/distributions.hpp"
#include "xbandit/estimators.hpp"
#include "xbandit/rng.hpp"

using namespace xbandit;

namespace {

std::vector<double> pareto_samples(double alpha, double C, std::size_t n, std::uint64_t seed) {
  const ExactPareto d(alpha, C);
  const CounterStream s(seed);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = d.quantile(s.uniform_at(i));
  return out;
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("count ratio oracles") {
  // r = 0: thresholds 1 and e.
  std::vector<double> xs(8, 2.0);
  xs.insert(xs.end(), 2, 5.0);
  xs.insert(xs.end(), 5, 0.5);
  auto a = estimate_alpha_at(xs, 0.0);
  CHECK(a.defined);
  CHECK(a.above_low == 10);
  CHECK(a.above_high == 2);
  CHECK(a.alpha == doctest::Approx(std::log(5.0)));

  std::vector<double> ys{1.5, 1.5, 1.5, 1.5, 9.0};
  CHECK(estimate_alpha_at(ys, 0.0).alpha == doctest::Approx(std::log(5.0)));

  std::vector<double> all_high{5.0, 6.0, 7.0};
  auto eq = estimate_alpha_at(all_high, 0.0);
  CHECK(eq.defined);
  CHECK(eq.alpha == 0.0);

  auto none = estimate_alpha_at(std::vector<double>{1.5, 2.0}, 0.0);
  CHECK_FALSE(none.defined);
  CHECK_THROWS(estimate_alpha_at(std::vector<double>{}, 0.0));
}

TEST_CASE("count ratio invariances") {
  auto xs = pareto_samples(2.0, 1.0, 5000, 3);
  const double r = 0.7;
  const auto base = estimate_alpha_at(xs, r);
  SplitMix64 rng(4);
  std::shuffle(xs.begin(), xs.end(), rng);
  CHECK(estimate_alpha_at(xs, r).alpha == base.alpha);
  xs.insert(xs.end(), 1000, std::exp(r));
  xs.insert(xs.end(), 1000, 0.1);
  CHECK(estimate_alpha_at(xs, r).alpha == base.alpha);
}

TEST_CASE("select_r on exact Pareto") {
  for (auto [alpha, C, lo, hi] : {std::tuple{1.5, 1.0, 1.4, 1.6}, std::tuple{10.0, 1e5, 9.0, 11.0}}) {
    const auto xs = pareto_samples(alpha, C, 1'000'000, 17);
    const auto choice = select_r(xs, 0.01);
    CAPTURE(alpha);
    CHECK(choice.status != ThresholdStatus::degenerate);
    const double a = estimate_alpha_at(xs, choice.r).alpha;
    CHECK(a == doctest::Approx(choice.alpha));
    CHECK(a >= lo);
    CHECK(a <= hi);
  }
}

TEST_CASE("select_r degenerate inputs") {
  CHECK(select_r(std::vector<double>(1000, 3.0), 0.01).status == ThresholdStatus::degenerate);
  CHECK(select_r(std::vector<double>(4, 3.0), 0.01).status == ThresholdStatus::degenerate);
  CHECK_THROWS(select_r(std::vector<double>{}, 0.01));
  CHECK_THROWS(select_r(std::vector<double>{1, 2, 3}, 1.0));
  CHECK(estimate_h(std::vector<double>(1000, 3.0), 0.01) == 1.0);
}

TEST_CASE("select_r work is linear in the sample size") {
  OpCounter small, large;
  select_r(pareto_samples(1.5, 1, 1 << 14, 1), 1e-6, &small);
  select_r(pareto_samples(1.5, 1, 1 << 16, 1), 1e-6, &large);
  const double ratio = static_cast<double>(large.visits) / static_cast<double>(small.visits);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("h oracles") {
  CHECK(clip_h(2.0) == 0.5);
  CHECK(clip_h(0.5) == 1.0);
  CHECK(clip_h(0.0) == 1.0);
  CHECK(clip_h(-1.0) == 1.0);
  const double h = estimate_h(pareto_samples(1.5, 1, 1'000'000, 9), 0.01);
  CHECK(h >= 0.62);
  CHECK(h <= 0.71);
}

TEST_CASE("C estimator oracles") {
  CHECK(estimate_C(std::vector<double>{0.1, 0.2, 0.3}, 1.0, 1.0) == 0.0);
  CHECK(estimate_C(std::vector<double>{1.0}, 1.0, 0.5) == 1.0);
  const double c = estimate_C(pareto_samples(1.5, 1, 1'000'000, 5), 1.0, 2.0 / 3.0);
  CHECK(c >= 0.8);
  CHECK(c <= 1.2);
  CHECK_THROWS(estimate_C(std::vector<double>{}, 1.0, 0.5));
  CHECK_THROWS(estimate_C(std::vector<double>{1.0}, 1.0, 1.5));
}

TEST_CASE("alpha consistency at alpha = 2") {
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto xs = pareto_samples(2.0, 1.0, 1'000'000, derive_seed(77, seed));
    const auto est = estimate_tail(xs, 1e-6, 1.0);
    ok += !est.degenerate && std::abs(est.alpha_hat - 2.0) <= 0.2;
  }
  CHECK(ok >= 9);
}

TEST_CASE("confidence widths") {
  EstimatorConfig cfg;
  CHECK(lambda1(1, cfg, std::exp(-1.0)) == doctest::Approx(1.0));
  CHECK(lambda1(8 * 50, cfg, 0.1) / lambda1(50, cfg, 0.1) == doctest::Approx(0.5));
  CHECK(lambda2(1e4, cfg, 0.5) ==
        doctest::Approx(std::sqrt(std::log(2e4)) * std::log(1e4) * std::pow(10.0, -4.0 / 3.0)));
  CHECK(lambda2(1, cfg, 0.5) == 0.0);

  const double d0 = 1e-30;
  double p1 = 1e300, p2 = 1e300;
  for (double T = 1; T < 1e7; T *= 1.5) {
    const double l1 = lambda1(T, cfg, d0);
    CHECK(l1 < p1);
    p1 = l1;
    if (T >= 1e3) {
      const double l2 = lambda2(T, cfg, d0);
      CHECK(l2 < p2);
      p2 = l2;
    }
  }
  CHECK(lambda1(1e12, cfg, d0) < 1e-2);
  CHECK(lambda2(1e15, cfg, d0) < 1e-2);
  CHECK_THROWS(lambda1(0.5, cfg, d0));
}

TEST_CASE("delta0 oracles") {
  CHECK(delta0_of(1e5, 1.5) == doctest::Approx(1e-30).epsilon(1e-9));
  CHECK(delta0_of(10, 2) == doctest::Approx(1e-4));
  CHECK(delta0_of(10, 1e9) == doctest::Approx(1e-2).epsilon(1e-6));
  CHECK_THROWS(delta0_of(10, 1.0));
  EstimatorConfig cfg;
  CHECK(cfg.confidence_level(1e5) == doctest::Approx(1e-30).epsilon(1e-9));
  cfg.delta0 = 0.05;
  CHECK(cfg.confidence_level(1e5) == 0.05);
}

TEST_CASE("required pulls") {
  EstimatorConfig cfg;
  const std::size_t N = required_pulls_N(1e5, cfg);
  CHECK(N == static_cast<std::size_t>(std::ceil(1e-3 * std::pow(std::log(1e5), 6))));
  CHECK(3 * N >= 6900);
  CHECK(3 * N <= 7100);
  EstimatorConfig b2 = cfg;
  b2.b = 2;
  CHECK(required_pulls_N(1e5, b2) < N);
  std::size_t prev = 0;
  for (double n = 3; n < 1e9; n *= 3) {
    const std::size_t v = required_pulls_N(n, cfg);
    CHECK(v >= prev);
    prev = v;
  }
  EstimatorConfig more = cfg;
  more.A0 = 2e-3;
  CHECK(required_pulls_N(1e5, more) >= N);
  CHECK_THROWS(required_pulls_N(2, cfg));
}

TEST_CASE("config validation") {
  EstimatorConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.b = 0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.delta0 = 1.5;
  CHECK_THROWS(cfg.validate());
}

}
