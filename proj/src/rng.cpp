#include "xbandit/rng.hpp"

namespace xbandit {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  // Two rounds so that nearby masters and nearby indices do not collide.
  return mix64(mix64(master ^ 0x6a09e667f3bcc909ULL) + (index + 1) * kGoldenGamma);
}

std::uint64_t SplitMix64::bounded(std::uint64_t bound) noexcept {
  // Rejection on the low residue class keeps the result exactly uniform.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = (*this)();
    if (r >= threshold) return r % bound;
  }
}

}  // namespace xbandit
