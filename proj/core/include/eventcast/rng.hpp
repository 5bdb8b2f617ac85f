#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace eventcast {

/// Stream-mixes two 64-bit values (seed, draw key) into a fresh seed.
std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept;

/// FNV-1a over the bytes of `text`; stable across platforms, used for
/// feature hashing.
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// splitmix64 generator. Every random draw in this library goes through
/// this class so that results do not depend on the standard library's
/// distribution implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept;

  /// Uniform double in [0, 1), 53 bits of precision.
  double next_unit() noexcept;

  /// Uniform integer in [0, bound); bound must be >= 1. Unbiased via
  /// rejection sampling.
  std::uint64_t next_below(std::uint64_t bound) noexcept;

  /// Uniform double in [lo, hi).
  double next_in(double lo, double hi) noexcept;

  /// Gaussian with mean 0 and the given sigma (Box-Muller).
  double next_gaussian(double sigma) noexcept;

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace eventcast
