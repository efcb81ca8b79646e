#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace offeval {

// SplitMix64 output function. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Derives an independent seed for a named substream. Same (seed, label)
// always yields the same value, so parallel or resumed runs can rebuild
// exactly the stream they need.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                          std::uint64_t index);

// Maps x in [0, 1] onto the 2^64 grid, using exactly the 53 bits a double
// carries. An event with probability x fires when a raw draw lands below the
// returned point.
std::uint64_t grid_point(double x);

// Counter-based generator: the k-th output is a pure function of (seed, k).
// No platform-dependent state, identical sequences everywhere.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : counter_(seed) {}

  std::uint64_t next() { return mix64(counter_++); }

  // Uniform in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);

  double uniform01();  // in [0, 1)

  // True with probability p. Compares one draw against an integer threshold.
  bool bernoulli(double p);

 private:
  std::uint64_t counter_;
};

// Samples index i with probability w_i / sum(w). The cumulative distribution
// is frozen onto a 2^64 integer grid at construction, so a draw is a single
// 64-bit compare chain independent of floating-point rounding at draw time.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(std::span<const double> weights);

  std::size_t draw(RandomStream& rng) const;
  std::size_t size() const { return n_; }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> cuts_;  // n-1 ascending cut points
};

}  // namespace offeval
