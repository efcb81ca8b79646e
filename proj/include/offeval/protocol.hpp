#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "offeval/recommender.hpp"
#include "offeval/rng.hpp"
#include "offeval/snapshot.hpp"
#include "offeval/types.hpp"
#include "offeval/weights.hpp"

namespace offeval {

// 95% Wald interval around p_hat at sample size n, clamped to [0, 1].
std::pair<double, double> wald_ci(double p_hat, std::int64_t n);

// 1 when the hidden item appears in the list, else 0.
int quality(const RecommendationList& rec, ItemId target);

struct SamplingConfig {
  std::int64_t n_draws = 20000;
  std::uint64_t seed = 1;
  // Item weights reshaping the in-profile draw; null means uniform.
  const WeightVector* weights = nullptr;
};

struct EvaluationResult {
  double score = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string mode;            // "stochastic" or "exhaustive"
  std::int64_t n_draws = 0;    // 0 in exhaustive mode
  std::int64_t hits = 0;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

// Draws (user, item) pairs: user uniform over users with a non-empty
// profile, then an item from that profile with probability proportional to
// its weight (uniform when constructed without weights). Per-user cumulative
// tables are frozen to the 2^64 integer grid at construction. Keeps a
// reference to the snapshot (and not the weights), which must outlive it.
class PairSampler {
 public:
  explicit PairSampler(const Snapshot& s, const WeightVector* weights = nullptr);

  std::pair<UserId, ItemId> draw(RandomStream& rng) const;
  std::int64_t n_eligible_users() const;

 private:
  const Snapshot* snap_;
  std::vector<std::int64_t> offsets_;  // per eligible user, into cuts_
  std::vector<std::uint64_t> cuts_;
};

// One-off convenience wrapper around PairSampler.
std::pair<UserId, ItemId> draw_pair(const Snapshot& s,
                                    const WeightVector* weights,
                                    RandomStream& rng);

// Monte Carlo estimate of the leave-one-out hit rate: each draw hides the
// drawn item from the drawn user's profile, asks the recommender for k items
// and scores a hit if the hidden item comes back. Every draw runs on its own
// derived substream, so the result depends only on (seed, n_draws), not on
// how draws are batched across workers.
EvaluationResult evaluate_stochastic(const Recommender& g, const Snapshot& s,
                                     const SamplingConfig& config, int k = 5);

// Exact expectation of the same quantity: sum over eligible users and their
// items of P(u) * P(i | u, w) * quality. Weights null means uniform.
EvaluationResult evaluate_exhaustive(const Recommender& g, const Snapshot& s,
                                     const WeightVector* weights = nullptr,
                                     int k = 5);

}  // namespace offeval
