#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "offeval/snapshot.hpp"
#include "offeval/types.hpp"

namespace offeval {

// Sparse score vector: explicit (item, score) entries sorted by item id,
// every absent item scores 0. Scores must be finite.
class ScoreVector {
 public:
  ScoreVector() = default;
  static ScoreVector from_entries(std::vector<std::pair<ItemId, double>> entries);

  double get(ItemId i) const;
  std::span<const std::pair<ItemId, double>> entries() const { return entries_; }
  std::size_t support_size() const { return entries_.size(); }

 private:
  std::vector<std::pair<ItemId, double>> entries_;
};

using RecommendationList = std::vector<ItemId>;

// Largest k scores, ties broken by ascending item id, excluded items dropped
// first. Only explicitly scored items are candidates; zero or negative scores
// rank after every positive one, so they fill the list only when positives
// run out.
RecommendationList top_k(const ScoreVector& scores, int k,
                         std::span<const ItemId> exclude = {});

// User-based cosine scoring. For each co-user v of the profile,
// sim(u, v) = <B_u, B_v> / sqrt(|B_u| * |B_v|) and every item of v
// accumulates sim(u, v). This default takes the square root over the
// product of the profile norms, damping the size penalty; kStandard divides
// by the plain norm product, which is ordinary cosine similarity.
enum class CosineVariant { kDamped, kStandard };

ScoreVector cosine_cf_scores(const ProfileView& profile, const Snapshot& s,
                             CosineVariant variant = CosineVariant::kDamped);

// Co-occurrence scoring: score(i) = max over profile items j of
// #(U_i n U_j) / #U_j.
ScoreVector naive_cf_scores(const ProfileView& profile, const Snapshot& s);

class Recommender {
 public:
  virtual ~Recommender() = default;
  virtual std::string name() const = 0;
  virtual RecommendationList recommend(const ProfileView& profile,
                                       const Snapshot& snapshot,
                                       int k) const = 0;
};

// Always returns the same list (truncated to k), regardless of the profile.
class ConstantRecommender : public Recommender {
 public:
  explicit ConstantRecommender(std::vector<ItemId> items,
                               std::string name = "constant");
  std::string name() const override { return name_; }
  RecommendationList recommend(const ProfileView&, const Snapshot&,
                               int k) const override;
  std::span<const ItemId> items() const { return items_; }

 private:
  std::vector<ItemId> items_;
  std::string name_;
};

class CosineCfRecommender : public Recommender {
 public:
  explicit CosineCfRecommender(CosineVariant variant = CosineVariant::kDamped);
  std::string name() const override;
  RecommendationList recommend(const ProfileView& profile, const Snapshot& s,
                               int k) const override;

 private:
  CosineVariant variant_;
};

class NaiveCfRecommender : public Recommender {
 public:
  std::string name() const override { return "naive"; }
  RecommendationList recommend(const ProfileView& profile, const Snapshot& s,
                               int k) const override;
};

// Most popular items at the snapshot (by item degree), profile excluded.
class PopularityRecommender : public Recommender {
 public:
  std::string name() const override { return "popular"; }
  RecommendationList recommend(const ProfileView& profile, const Snapshot& s,
                               int k) const override;
};

// Builds a recommender from a spec string:
//   constant:<id>[,<id>...]   fixed list, ids are external labels of `log`
//   cosine[:damped|:standard] cosine scorer (damped norm is the default)
//   naive                     co-occurrence scorer
//   popular                   popularity baseline
//   campaign_top:<k>          top-k items by campaign-sourced event count
//   organic_top:<k>@<t>       top-k items by degree at time t among items
//                             never touched by any campaign
// The last three resolve against the log at construction time and behave as
// constant lists afterwards. Unknown specs raise std::invalid_argument.
std::unique_ptr<Recommender> make_recommender(std::string_view spec,
                                              const InteractionLog& log);

}  // namespace offeval
