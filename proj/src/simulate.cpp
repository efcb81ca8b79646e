#include "offeval/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "offeval/debias.hpp"
#include "offeval/recommender.hpp"
#include "offeval/snapshot.hpp"

namespace offeval {

namespace {

constexpr int kMaxRedraws = 64;

std::vector<double> zipf_weights(const SimulationConfig& cfg) {
  std::vector<double> w(cfg.n_items);
  for (int r = 0; r < cfg.n_items; ++r)
    w[r] = std::pow(static_cast<double>(r + 1), -cfg.zipf_exponent);
  return w;
}

// Organic events on the grid t_j = (j+1)/rate for t_from < t_j <= t_to.
// Each event pairs a uniform user with a popularity-sampled item; pairs that
// already exist are re-drawn a bounded number of times, then dropped.
void append_organic(InteractionLog& log, const SimulationConfig& cfg,
                    const DiscreteSampler& zipf, Timestamp t_from,
                    Timestamp t_to, RandomStream& rng) {
  const double rate = cfg.effective_rate();
  std::int64_t j = std::max<std::int64_t>(
      0, static_cast<std::int64_t>(std::floor(t_from * rate)) - 1);
  while ((j + 1) / rate <= t_from) ++j;
  for (;; ++j) {
    const Timestamp t = (j + 1) / rate;
    if (t > t_to) break;
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
      const UserId u = static_cast<UserId>(rng.below(cfg.n_users));
      const ItemId i = static_cast<ItemId>(zipf.draw(rng));
      if (!log.has_edge(u, i)) {
        log.add(u, i, t, Source::organic());
        break;
      }
    }
  }
}

void validate_campaign(const Campaign& c, const SimulationConfig& cfg) {
  if (c.id < 0) throw std::invalid_argument("campaign id must be >= 0");
  if (!(c.time > 0.0) || !(c.time < cfg.horizon))
    throw std::invalid_argument("campaign time must lie inside (0, horizon)");
  if (c.recommender.empty())
    throw std::invalid_argument("campaign needs a recommender spec");
  if (c.k <= 0) throw std::invalid_argument("campaign k must be > 0");
  if (!(c.target_fraction > 0.0) || !(c.target_fraction <= 1.0))
    throw std::invalid_argument("campaign target_fraction must be in (0, 1]");
  if (!(c.accept_prob >= 0.0) || !(c.accept_prob <= 1.0))
    throw std::invalid_argument("campaign accept_prob must be in [0, 1]");
}

}  // namespace

double SimulationConfig::effective_rate() const {
  if (organic_rate > 0.0) return organic_rate;
  return static_cast<double>(n_users) * mean_profile_size / horizon;
}

void SimulationConfig::validate() const {
  if (n_users <= 0 || n_items <= 0)
    throw std::invalid_argument("simulation needs users and items");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("horizon must be positive and finite");
  if (!(zipf_exponent >= 0.0) || !std::isfinite(zipf_exponent))
    throw std::invalid_argument("zipf_exponent must be >= 0");
  if (organic_rate < 0.0 || !std::isfinite(organic_rate))
    throw std::invalid_argument("organic_rate must be >= 0");
  if (organic_rate == 0.0 &&
      (!(mean_profile_size > 0.0) || !std::isfinite(mean_profile_size)))
    throw std::invalid_argument(
        "mean_profile_size must be > 0 when organic_rate is derived");
  if (mean_profile_size > static_cast<double>(n_items))
    throw std::invalid_argument(
        "mean_profile_size cannot exceed the number of items");
  if (!(effective_rate() > 0.0))
    throw std::invalid_argument("organic event rate works out to zero");
  std::vector<std::int32_t> ids;
  for (const Campaign& c : campaigns) {
    validate_campaign(c, *this);
    ids.push_back(c.id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
    throw std::invalid_argument("campaign ids must be unique");
}

InteractionLog generate_initial(const SimulationConfig& cfg,
                                RandomStream& rng) {
  cfg.validate();
  InteractionLog log = InteractionLog::with_universe(cfg.n_users, cfg.n_items);
  const DiscreteSampler zipf(zipf_weights(cfg));
  Timestamp t_end = cfg.horizon;
  for (const Campaign& c : cfg.campaigns) t_end = std::min(t_end, c.time);
  append_organic(log, cfg, zipf, 0.0, t_end, rng);
  return log;
}

InteractionLog run_campaign(InteractionLog log, const Campaign& c,
                            RandomStream& rng) {
  if (c.time < log.last_timestamp())
    throw std::invalid_argument("campaign time precedes the end of the log");
  const Snapshot s = snapshot_at(log, c.time);
  if (s.n_users() == 0) return log;  // nobody to target yet
  const auto rec = make_recommender(c.recommender, log);

  std::vector<UserId> pool(s.users().begin(), s.users().end());
  auto m = static_cast<std::size_t>(
      std::llround(c.target_fraction * static_cast<double>(pool.size())));
  m = std::min(m, pool.size());
  // Partial Fisher-Yates: the first m entries become the targeted sample.
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t swap_with =
        j + static_cast<std::size_t>(rng.below(pool.size() - j));
    std::swap(pool[j], pool[swap_with]);
  }
  pool.resize(m);
  std::sort(pool.begin(), pool.end());

  for (UserId u : pool) {
    const RecommendationList items = rec->recommend(s.profile(u), s, c.k);
    for (ItemId i : items) {
      if (log.has_edge(u, i)) continue;
      if (rng.bernoulli(c.accept_prob))
        log.add(u, i, c.time, Source::campaign(c.id));
    }
  }
  return log;
}

InteractionLog run_timeline(const SimulationConfig& cfg) {
  cfg.validate();
  RandomStream rng(derive_seed(cfg.seed, "timeline"));
  std::vector<Campaign> campaigns = cfg.campaigns;
  std::stable_sort(campaigns.begin(), campaigns.end(),
                   [](const Campaign& a, const Campaign& b) {
                     return a.time < b.time;
                   });
  InteractionLog log = InteractionLog::with_universe(cfg.n_users, cfg.n_items);
  const DiscreteSampler zipf(zipf_weights(cfg));
  Timestamp prev = 0.0;
  for (const Campaign& c : campaigns) {
    append_organic(log, cfg, zipf, prev, c.time, rng);
    log = run_campaign(std::move(log), c, rng);
    prev = c.time;
  }
  append_organic(log, cfg, zipf, prev, cfg.horizon, rng);
  return log;
}

ProbabilitySeries item_probability_series(const InteractionLog& log,
                                          std::span<const Timestamp> times) {
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] < times[i - 1])
      throw std::invalid_argument(
          "item_probability_series: times must be ascending");
  ProbabilitySeries series;
  series.times.assign(times.begin(), times.end());
  const WeightVector ones = WeightVector::ones(log.n_items());
  for (Timestamp t : times) {
    const Snapshot s = snapshot_at(log, t);
    if (s.n_users() == 0)
      series.distributions.emplace_back(std::vector<double>(log.n_items(), 0.0));
    else
      series.distributions.push_back(item_distribution(s, ones));
  }
  return series;
}

}  // namespace offeval
