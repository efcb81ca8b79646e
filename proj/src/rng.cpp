#include "offeval/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace offeval {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace

std::uint64_t grid_point(double x) {
  if (x <= 0.0) return 0;
  if (x >= 1.0) return ~0ull;
  return static_cast<std::uint64_t>(std::llround(x * 9007199254740992.0))
         << 11;  // 2^53, then shift to span the 64-bit range
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  return mix64(seed ^ mix64(fnv1a(label)));
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                          std::uint64_t index) {
  return mix64(derive_seed(seed, label) + 0x9E3779B97F4A7C15ull * (index + 1));
}

std::uint64_t RandomStream::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("RandomStream::below: n must be > 0");
  if (n == 1) return 0;
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % n;
  }
}

double RandomStream::uniform01() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

bool RandomStream::bernoulli(double p) {
  if (!(p >= 0.0) || !(p <= 1.0) || !std::isfinite(p))
    throw std::invalid_argument("RandomStream::bernoulli: p outside [0, 1]");
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return next() < grid_point(p);
}

DiscreteSampler::DiscreteSampler(std::span<const double> weights)
    : n_(weights.size()) {
  if (n_ == 0)
    throw std::invalid_argument("DiscreteSampler: empty weight vector");
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w <= 0.0)
      throw std::invalid_argument(
          "DiscreteSampler: weights must be positive and finite");
    total += w;
  }
  cuts_.reserve(n_ - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n_; ++i) {
    acc += weights[i];
    std::uint64_t cut = grid_point(acc / total);
    if (!cuts_.empty() && cut < cuts_.back()) cut = cuts_.back();
    cuts_.push_back(cut);
  }
}

std::size_t DiscreteSampler::draw(RandomStream& rng) const {
  const std::uint64_t r = rng.next();
  return static_cast<std::size_t>(
      std::upper_bound(cuts_.begin(), cuts_.end(), r) - cuts_.begin());
}

}  // namespace offeval
