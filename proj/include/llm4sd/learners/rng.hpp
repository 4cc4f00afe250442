//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_LEARNERS_RNG_HPP_
#define LLM4SD_LEARNERS_RNG_HPP_

#include <cstdint>
#include <limits>

namespace llm4sd::learn {

/// Counter-based generator: output k of stream (seed, id) is a fixed
/// function of (seed, id, k), so substreams never depend on scheduling.
/// Satisfies UniformRandomBitGenerator; bounded() and uniform() are defined
/// here rather than through <random> distributions so sequences are the
/// same on every standard library.
class CounterRng {
public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(mix(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL))) { }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform integer in [0, n); n > 0.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % n;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const { return counter_; }

private:
  static std::uint64_t mix(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Fisher-Yates shuffle driven by CounterRng::bounded.
template<typename It>
void shuffle(It first, It last, CounterRng &rng) {
  const auto n = last - first;
  for (auto i = n - 1; i > 0; --i) {
    const auto j = static_cast<decltype(i)>(rng.bounded(static_cast<std::uint64_t>(i) + 1));
    std::swap(first[i], first[j]);
  }
}

}  // namespace llm4sd::learn

#endif  // LLM4SD_LEARNERS_RNG_HPP_
