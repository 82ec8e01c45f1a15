#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace xbandit {

/// SplitMix64 output mix (Steele, Lea & Flood). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Maps 64 random bits to a double in [0, 1) on the 2^-53 lattice.
constexpr double to_unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Seed for sub-stream `index` of `master`. Distinct (master, index) pairs map to
/// well-separated keys; used for replicate seeds and per-arm reward tables.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Counter-based stream: element i is mix64(key + (i + 1) * golden), so any
/// position can be read without generating its predecessors. Sequential reads
/// reproduce the SplitMix64 generator started at `key`.
class CounterStream {
 public:
  explicit constexpr CounterStream(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t bits_at(std::uint64_t i) const noexcept {
    return mix64(key_ + (i + 1) * kGoldenGamma);
  }
  constexpr double uniform_at(std::uint64_t i) const noexcept {
    return to_unit_interval(bits_at(i));
  }
  constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
};

/// Sequential SplitMix64; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  double uniform() noexcept { return to_unit_interval((*this)()); }

  /// Unbiased integer in [0, bound); bound must be positive.
  std::uint64_t bounded(std::uint64_t bound) noexcept;

 private:
  std::uint64_t state_;
};

}  // namespace xbandit
