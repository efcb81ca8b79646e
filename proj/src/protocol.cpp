#include "offeval/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "offeval/text.hpp"

namespace offeval {

std::pair<double, double> wald_ci(double p_hat, std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("wald_ci: n must be > 0");
  if (!(p_hat >= 0.0) || !(p_hat <= 1.0))
    throw std::invalid_argument("wald_ci: p_hat outside [0, 1]");
  const double hw =
      1.96 * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
  return {std::max(0.0, p_hat - hw), std::min(1.0, p_hat + hw)};
}

int quality(const RecommendationList& rec, ItemId target) {
  return std::find(rec.begin(), rec.end(), target) != rec.end() ? 1 : 0;
}

std::string EvaluationResult::to_json() const {
  nlohmann::ordered_json j;
  j["score"] = score;
  j["ci_low"] = ci_low;
  j["ci_high"] = ci_high;
  j["mode"] = mode;
  j["n_draws"] = n_draws;
  j["hits"] = hits;
  j["seed"] = seed;
  return j.dump();
}

PairSampler::PairSampler(const Snapshot& s, const WeightVector* weights)
    : snap_(&s) {
  if (weights && weights->size() != s.n_item_slots())
    throw std::invalid_argument("PairSampler: weight universe mismatch");
  if (s.n_users() == 0)
    throw std::invalid_argument(
        "PairSampler: no user with a non-empty profile");
  offsets_.reserve(s.n_users() + 1);
  offsets_.push_back(0);
  for (UserId u : s.users()) {
    const auto items = s.items_of(u);
    double total = 0.0;
    for (ItemId i : items) total += weights ? (*weights)[i] : 1.0;
    const std::size_t block_start = cuts_.size();
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < items.size(); ++j) {
      acc += weights ? (*weights)[items[j]] : 1.0;
      std::uint64_t cut = grid_point(acc / total);
      if (cuts_.size() > block_start && cut < cuts_.back()) cut = cuts_.back();
      cuts_.push_back(cut);
    }
    offsets_.push_back(static_cast<std::int64_t>(cuts_.size()));
  }
}

std::int64_t PairSampler::n_eligible_users() const {
  return static_cast<std::int64_t>(snap_->users().size());
}

std::pair<UserId, ItemId> PairSampler::draw(RandomStream& rng) const {
  const auto users = snap_->users();
  const std::size_t idx =
      static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(users.size())));
  const UserId u = users[idx];
  const auto items = snap_->items_of(u);
  if (items.size() == 1) return {u, items[0]};
  const std::uint64_t r = rng.next();
  const auto first = cuts_.begin() + offsets_[idx];
  const auto last = cuts_.begin() + offsets_[idx + 1];
  const std::size_t j =
      static_cast<std::size_t>(std::upper_bound(first, last, r) - first);
  return {u, items[j]};
}

std::pair<UserId, ItemId> draw_pair(const Snapshot& s,
                                    const WeightVector* weights,
                                    RandomStream& rng) {
  return PairSampler(s, weights).draw(rng);
}

EvaluationResult evaluate_stochastic(const Recommender& g, const Snapshot& s,
                                     const SamplingConfig& config, int k) {
  if (config.n_draws <= 0)
    throw std::invalid_argument("evaluate_stochastic: n_draws must be > 0");
  const PairSampler sampler(s, config.weights);
  std::int64_t hits = 0;
  for (std::int64_t d = 0; d < config.n_draws; ++d) {
    RandomStream rs(derive_seed(config.seed, "draw", static_cast<std::uint64_t>(d)));
    const auto [u, i] = sampler.draw(rs);
    const ProfileView view = remove_item_view(s, u, i);
    hits += quality(g.recommend(view, s, k), i);
  }
  EvaluationResult res;
  res.score = static_cast<double>(hits) / static_cast<double>(config.n_draws);
  std::tie(res.ci_low, res.ci_high) = wald_ci(res.score, config.n_draws);
  res.mode = "stochastic";
  res.n_draws = config.n_draws;
  res.hits = hits;
  res.seed = config.seed;
  return res;
}

EvaluationResult evaluate_exhaustive(const Recommender& g, const Snapshot& s,
                                     const WeightVector* weights, int k) {
  const WeightVector local =
      weights ? *weights : WeightVector::ones(s.n_item_slots());
  if (local.size() != s.n_item_slots())
    throw std::invalid_argument("evaluate_exhaustive: weight universe mismatch");
  if (s.n_users() == 0)
    throw std::invalid_argument(
        "evaluate_exhaustive: no user with a non-empty profile");
  double total = 0.0;
  std::int64_t hits = 0;
  for (UserId u : s.users()) {
    const auto items = s.items_of(u);
    double sum_w = 0.0;
    for (ItemId i : items) sum_w += local[i];
    double hit_w = 0.0;
    for (ItemId i : items) {
      const ProfileView view = remove_item_view(s, u, i);
      if (quality(g.recommend(view, s, k), i)) {
        hit_w += local[i];
        ++hits;
      }
    }
    total += hit_w / sum_w;
  }
  EvaluationResult res;
  res.score =
      std::clamp(total / static_cast<double>(s.n_users()), 0.0, 1.0);
  res.ci_low = res.score;
  res.ci_high = res.score;
  res.mode = "exhaustive";
  res.n_draws = 0;
  res.hits = hits;
  res.seed = 0;
  return res;
}

}  // namespace offeval
