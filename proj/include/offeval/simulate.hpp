#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "offeval/interaction_log.hpp"
#include "offeval/rng.hpp"
#include "offeval/types.hpp"
#include "offeval/weights.hpp"

namespace offeval {

// A push of recommendations at one instant: a fraction of the users present
// at that time each receive k items from the named recommender and accept
// each item they do not already hold independently with accept_prob.
struct Campaign {
  std::int32_t id = 0;
  Timestamp time = 0.0;
  std::string recommender;       // spec for make_recommender
  int k = 5;
  double target_fraction = 1.0;  // of users present at `time`
  double accept_prob = 0.3;
};

struct SimulationConfig {
  int n_users = 0;
  int n_items = 0;
  double zipf_exponent = 1.0;    // item popularity ~ (rank+1)^-exponent
  double mean_profile_size = 5.0;
  double organic_rate = 0.0;     // events per day; 0 derives it from the mean
  Timestamp horizon = 0.0;
  std::vector<Campaign> campaigns;
  std::uint64_t seed = 1;

  double effective_rate() const;
  void validate() const;  // throws std::invalid_argument
};

// Organic history up to the first campaign (or the horizon when there is
// none): events on the deterministic time grid (j+1)/rate, each pairing a
// uniform user with a popularity-sampled item, duplicates re-drawn.
InteractionLog generate_initial(const SimulationConfig& cfg, RandomStream& rng);

// Applies one campaign to the log at c.time and returns the extended log.
// Organic noise is not advanced here; run_timeline interleaves it.
InteractionLog run_campaign(InteractionLog log, const Campaign& c,
                            RandomStream& rng);

// Full history over [0, horizon]: organic segments between campaigns, each
// campaign applied at its instant. Deterministic given cfg.seed.
InteractionLog run_timeline(const SimulationConfig& cfg);

struct ProbabilitySeries {
  std::vector<Timestamp> times;
  std::vector<ItemDistribution> distributions;  // aligned with times
};

// Unweighted item marginal at each requested time (ascending). Times before
// the first event yield the all-zero distribution.
ProbabilitySeries item_probability_series(const InteractionLog& log,
                                          std::span<const Timestamp> times);

}  // namespace offeval
