#include <doctest.h>

#include <array>
#include <set>

#include "xbandit/rng.hpp"

using namespace xbandit;

TEST_SUITE("rng") {

TEST_CASE("counter stream reproduces sequential splitmix") {
  CounterStream stream(12345);
  SplitMix64 seq(12345);
  for (std::uint64_t i = 0; i < 1000; ++i) CHECK(stream.bits_at(i) == seq());
}

TEST_CASE("counter stream is random access") {
  CounterStream stream(99);
  const double late = stream.uniform_at(1'000'000);
  CHECK(stream.uniform_at(3) == CounterStream(99).uniform_at(3));
  CHECK(late == CounterStream(99).uniform_at(1'000'000));
}

TEST_CASE("unit interval mapping stays in [0, 1)") {
  CHECK(to_unit_interval(0) == 0.0);
  CHECK(to_unit_interval(~std::uint64_t{0}) < 1.0);
  CHECK(to_unit_interval(~std::uint64_t{0}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("derived seeds do not collide on a small grid") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 64; ++m)
    for (std::uint64_t i = 0; i < 256; ++i) seen.insert(derive_seed(m, i));
  CHECK(seen.size() == 64 * 256);
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("bounded draws are in range and roughly uniform") {
  SplitMix64 rng(7);
  std::array<int, 3> counts{};
  const int draws = 300'000;
  for (int i = 0; i < draws; ++i) {
    const auto k = rng.bounded(3);
    REQUIRE(k < 3);
    ++counts[k];
  }
  // Chi-square with 2 degrees of freedom; 13.8 is the 0.001 critical value.
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - draws / 3.0) * (c - draws / 3.0) / (draws / 3.0);
  CHECK(chi2 < 13.8);
  CHECK(SplitMix64(1).bounded(1) == 0);
}

}
