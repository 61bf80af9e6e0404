#pragma once

#include <cstdint>
#include <span>

namespace neuropt {

/// PCG-XSH-RR generator with 64-bit state and 32-bit output.
///
/// Used everywhere reproducibility matters (weight init, shuffling, dataset
/// sampling): the output sequence is fixed by the seed on every platform,
/// unlike the distributions in <random>.
class Pcg32 {
 public:
  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0x5851f42d4c957f2dULL);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double();
  double uniform(double lo, double hi);

  /// Uniform integer in [0, bound) without modulo bias.
  std::uint32_t bounded(std::uint32_t bound);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = bounded(static_cast<std::uint32_t>(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
};

}  // namespace neuropt
