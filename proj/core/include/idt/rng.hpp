#pragma once

#include <cstdint>

namespace idt {

// Philox 4x32-10 counter-based generator.  Every output is a pure function
// of (seed, counter, stream), so sampling is reproducible bit-for-bit and
// parallel callers partition counter space instead of sharing state.
class PhiloxRng {
public:
  explicit PhiloxRng(std::uint64_t seed) noexcept
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)) {}

  /// 64 uniform bits for (counter, stream).
  std::uint64_t bits(std::uint64_t counter, std::uint32_t stream) const noexcept {
    std::uint32_t c0 = static_cast<std::uint32_t>(counter);
    std::uint32_t c1 = static_cast<std::uint32_t>(counter >> 32);
    std::uint32_t c2 = stream;
    std::uint32_t c3 = 0u;
    std::uint32_t k0 = key0_;
    std::uint32_t k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c0;
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c2;
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t n0 = hi1 ^ c1 ^ k0;
      const std::uint32_t n1 = lo1;
      const std::uint32_t n2 = hi0 ^ c3 ^ k1;
      const std::uint32_t n3 = lo0;
      c0 = n0; c1 = n1; c2 = n2; c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    return (std::uint64_t{c0} << 32) | c1;
  }

  /// Uniform double in [0, 1).
  double uniform(std::uint64_t counter, std::uint32_t stream) const noexcept {
    return static_cast<double>(bits(counter, stream) >> 11) * 0x1.0p-53;
  }

private:
  std::uint32_t key0_;
  std::uint32_t key1_;
};

}  // namespace idt
