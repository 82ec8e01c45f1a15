#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "xbandit/distributions.hpp"
#include "xbandit/policies.hpp"
#include "xbandit/rng.hpp"

using namespace xbandit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Drives a policy for n rounds against per-arm counter streams.
std::vector<ArmId> drive(Policy& p, const std::vector<ExactPareto>& arms, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> pulled(arms.size(), 0);
  std::vector<ArmId> out;
  for (std::size_t t = 1; t <= n; ++t) {
    const ArmId k = p.select(t);
    const double x = arms[k].quantile(CounterStream(derive_seed(seed, k)).uniform_at(pulled[k]++));
    p.update(k, x);
    out.push_back(k);
  }
  return out;
}

const std::vector<ExactPareto> kTable2{ExactPareto(15, 1e8), ExactPareto(1.5, 1), ExactPareto(10, 1e5)};

}  // namespace

TEST_SUITE("policies") {

TEST_CASE("argmax tie rule") {
  const std::vector<double> a{kInf, kInf, 5.0};
  const std::vector<std::size_t> ca{3, 1, 0};
  CHECK(select_max_index(a, ca) == 1);
  const std::vector<double> b{kInf, 1.0, kInf};
  const std::vector<std::size_t> cb{2, 0, 2};
  CHECK(select_max_index(b, cb) == 0);
  const std::vector<double> c{5.0, 7.0, 7.0};
  const std::vector<std::size_t> cc{0, 9, 1};
  CHECK(select_max_index(c, cc) == 1);
  CHECK_THROWS(select_max_index(std::vector<double>{}, std::vector<std::size_t>{}));
}

TEST_CASE("index oracles") {
  CHECK(optimistic_index(0.9, 0.3, 1.0, 0.0, 100) == kInf);
  CHECK(optimistic_index(0.5, 0.1, 1.0, 0.2, 1e4) ==
        doctest::Approx(std::tgamma(0.4) * std::pow(1.2e4, 0.6)).epsilon(1e-12));
  for (auto [alpha, C] : {std::pair{1.5, 1.0}, std::pair{15.0, 1e8}, std::pair{10.0, 1e5}}) {
    CHECK(optimistic_index(1 / alpha, 0, C, 0, 1e5) == doctest::Approx(frechet_value(1e5, alpha, C)).epsilon(1e-9));
  }
  TailEstimate degenerate;
  CHECK(index_B(degenerate, 10, 100, EstimatorConfig{}, 0.01) == kInf);
}

TEST_CASE("index optimism ordering, property") {
  SplitMix64 rng(2024);
  for (int i = 0; i < 500; ++i) {
    const double alpha = 1.1 + 9 * rng.uniform();
    const double C = std::exp(6 * rng.uniform() - 1);
    const double n = std::exp(3 + 10 * rng.uniform());
    const double h = 1 / alpha + (1 - 1 / alpha) * rng.uniform() * 0.9;
    const double l1 = (1 - h) * rng.uniform() * 0.9;
    const double l2 = rng.uniform();
    const double C_hat = C * (1 + rng.uniform());
    const double b1 = optimistic_index(h, l1, C_hat, l2, n);
    const double b2 = optimistic_index(h, l1, C_hat * 1.5, l2, n);
    CHECK(b2 >= b1);
    if ((C_hat + l2) * n >= 1) CHECK(b1 >= frechet_value(n, alpha, C) * (1 - 1e-12));
  }
}

TEST_CASE("ETC configuration errors") {
  try {
    ExtremeETC p(3, 100, 40, EstimatorConfig{});
    FAIL("expected a configuration error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("initialization exceeds horizon") != std::string::npos);
  }
  CHECK_THROWS(ExtremeETC(3, 100, 0, EstimatorConfig{}));
  CHECK_THROWS(ExtremeHunter(2, 10, 6, EstimatorConfig{}));
}

TEST_CASE("ETC block initialization then commitment") {
  ExtremeETC p(3, 2000, 100, EstimatorConfig{});
  const auto pulls = drive(p, kTable2, 2000, 1);
  for (std::size_t t = 0; t < 300; ++t) CHECK(pulls[t] == t / 100);
  REQUIRE(p.winner());
  const std::set<ArmId> after(pulls.begin() + 300, pulls.end());
  CHECK(after.size() == 1);
  CHECK(*after.begin() == *p.winner());
  CHECK(p.pull_counts()[0] + p.pull_counts()[1] + p.pull_counts()[2] == 2000);
  CHECK(p.reward_independent_after() == std::optional<std::size_t>(300));
  CHECK(p.estimator_ops() > 0);
}

TEST_CASE("ETC does no estimator work after commitment") {
  ExtremeETC a(3, 1000, 50, EstimatorConfig{});
  ExtremeETC b(3, 50000, 50, EstimatorConfig{});
  drive(a, kTable2, 1000, 4);
  drive(b, kTable2, 50000, 4);
  CHECK(a.estimator_ops() == b.estimator_ops());
}

TEST_CASE("ETC single arm") {
  ExtremeETC p(1, 50, 10, EstimatorConfig{});
  const auto pulls = drive(p, {ExactPareto(2, 1)}, 50, 3);
  CHECK(*p.winner() == 0);
  for (ArmId k : pulls) CHECK(k == 0);
}

TEST_CASE("ETC identical arms split evenly") {
  const std::vector<ExactPareto> twins{ExactPareto(2, 1), ExactPareto(2, 1)};
  int first = 0;
  const int runs = 1000;
  for (int r = 0; r < runs; ++r) {
    EstimatorConfig est;
    est.delta0 = 0.05;
    ExtremeETC p(2, 2000, 1000, est);
    drive(p, twins, 2000, derive_seed(31, r));
    first += *p.winner() == 0;
  }
  CHECK(std::abs(first / double(runs) - 0.5) <= 0.05);
}

TEST_CASE("Hunter agrees with ETC at commitment") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ExtremeETC etc(3, 1000, 100, EstimatorConfig{});
    ExtremeHunter hunter(3, 1000, 100, EstimatorConfig{});
    const auto a = drive(etc, kTable2, 301, seed);
    const auto b = drive(hunter, kTable2, 301, seed);
    CHECK(std::equal(a.begin(), a.begin() + 300, b.begin()));
    CHECK(b[300] == *etc.winner());
  }
}

TEST_CASE("Hunter recomputes only the pulled arm") {
  ExtremeHunter p(3, 600, 100, EstimatorConfig{});
  drive(p, kTable2, 300, 2);
  const auto at_init = p.estimator_ops();
  const std::vector<double> before(p.indices().begin(), p.indices().end());
  CHECK(at_init > 0);
  const ArmId k = p.select(301);
  p.update(k, kTable2[k].support_min() * 2);
  for (ArmId j = 0; j < 3; ++j) {
    if (j != k) CHECK(p.indices()[j] == before[j]);
  }
  CHECK(p.estimator_ops() > at_init);
}

TEST_CASE("robust UCB truncation and bonus formulas") {
  CHECK(truncation_level(2.0, 1.0, 4, 3) == doctest::Approx(std::sqrt(8.0 / (2 * std::log(3.0)))));
  CHECK(robust_bonus(1.0, 1.0, 4, 3) == doctest::Approx(4 * std::sqrt(2 * std::log(3.0) / 4)));
  for (double v : {0.5, 1.0, 2.0}) {
    CHECK(truncation_level(v * 2, 0.4, 7, 50) >= truncation_level(v, 0.4, 7, 50));
    CHECK(robust_bonus(v * 2, 0.4, 7, 50) >= robust_bonus(v, 0.4, 7, 50));
  }
  CHECK_THROWS(RobustUCB(2, 0.0, 1.0));
  CHECK_THROWS(RobustUCB(2, 1.5, 1.0));
  CHECK_THROWS(RobustUCB(2, 0.5, 0.0));
}

TEST_CASE("robust UCB truncated mean equals a brute-force rescan, property") {
  SplitMix64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const double eps = 0.1 + 0.9 * rng.uniform();
    const double v = std::exp(4 * rng.uniform() - 1);
    RobustUCB p(2, eps, v);
    std::vector<std::vector<double>> log(2);
    for (std::size_t t = 1; t <= 400; ++t) {
      const ArmId k = p.select(t);
      double y = rng.uniform() < 0.3 ? 0.0 : std::pow(1 - rng.uniform(), -1 / 1.5);
      p.update(k, y);
      log[k].push_back(y);
      if (t >= 2) {
        const std::size_t tt = t + 1;
        for (ArmId a = 0; a < 2; ++a) {
          double s = 0.0;
          for (std::size_t j = 0; j < log[a].size(); ++j) {
            if (log[a][j] <= truncation_level(v, eps, j + 1, tt)) s += log[a][j];
          }
          CHECK(p.truncated_mean(a, tt) == doctest::Approx(s / log[a].size()).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("robust UCB reduces to the sample mean below truncation") {
  RobustUCB p(1, 1.0, 1e9);
  double s = 0.0;
  for (std::size_t t = 1; t <= 20; ++t) {
    CHECK(p.select(t) == 0);
    p.update(0, static_cast<double>(t));
    s += static_cast<double>(t);
  }
  CHECK(p.truncated_mean(0, 21) == doctest::Approx(s / 20));
}

TEST_CASE("uniform policy") {
  UniformRandom one(1, 3);
  for (std::size_t t = 1; t <= 20; ++t) {
    CHECK(one.select(t) == 0);
    one.update(0, 1.0);
  }
  UniformRandom p(3, 11), q(3, 11);
  const auto a = drive(p, kTable2, 30000, 1);
  const auto b = drive(q, kTable2, 30000, 2);
  CHECK(a == b);
  for (ArmId k = 0; k < 3; ++k) {
    const double f = p.pull_counts()[k] / 30000.0;
    CHECK(f >= 0.32);
    CHECK(f <= 0.35);
  }
  CHECK(p.estimator_ops() == 0);
}

TEST_CASE("pull counts are conserved") {
  ExtremeHunter h(3, 800, 50, EstimatorConfig{});
  RobustUCB r(3, 0.4, 2.0);
  drive(h, kTable2, 800, 9);
  drive(r, kTable2, 800, 9);
  for (Policy* p : {static_cast<Policy*>(&h), static_cast<Policy*>(&r)}) {
    std::size_t s = 0;
    for (auto c : p->pull_counts()) s += c;
    CHECK(s == 800);
    CHECK(p->rounds_played() == 800);
  }
  CHECK_THROWS_AS(h.update(7, 1.0), std::out_of_range);
}

}
