#include "eventcast/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace eventcast {
namespace {

std::uint64_t splitmix_step(std::uint64_t& state) noexcept {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t state = a;
  std::uint64_t x = splitmix_step(state);
  state = x ^ b;
  return splitmix_step(state);
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t SplitMix64::next_u64() noexcept { return splitmix_step(state_); }

double SplitMix64::next_unit() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t SplitMix64::next_below(std::uint64_t bound) noexcept {
  if (bound < 2) return 0;
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t x, r;
  do {
    x = next_u64();
    r = x % bound;
  } while (x - r > max - (bound - 1));
  return r;
}

double SplitMix64::next_in(double lo, double hi) noexcept {
  return lo + next_unit() * (hi - lo);
}

double SplitMix64::next_gaussian(double sigma) noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_ * sigma;
  }
  // u1 in (0, 1] keeps the log finite.
  double u1 = 1.0 - next_unit();
  double u2 = next_unit();
  double mag = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  spare_ = mag * std::sin(angle);
  has_spare_ = true;
  return mag * std::cos(angle) * sigma;
}

}  // namespace eventcast
