#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

#include "ptdr/util.hpp"

namespace ptdr {

// SplitMix64 finalizer; also used to derive stream states from key tuples.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Small counter-based generator. One instance per logical stream; streams
// derived from the same seed with different keys are independent, so any
// sample of any run can be produced on any worker without shared state.
class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  // uniform in [0, 1)
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [lo, hi)
  double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

inline Rng derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(seed ^ 0x2545f4914f6cdd1dull);
  for (std::uint64_t k : keys) h = mix64(h ^ (k + 0x9e3779b97f4a7c15ull));
  return Rng(h);
}

inline std::uint64_t stream_key(std::string_view name) { return fnv1a64(name); }

}  // namespace ptdr
