#include "offeval/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "offeval/text.hpp"

namespace offeval {

ScoreVector ScoreVector::from_entries(
    std::vector<std::pair<ItemId, double>> entries) {
  std::sort(entries.begin(), entries.end());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!std::isfinite(entries[i].second))
      throw std::invalid_argument("ScoreVector: non-finite score");
    if (i > 0 && entries[i].first == entries[i - 1].first)
      throw std::invalid_argument("ScoreVector: duplicate item id");
  }
  ScoreVector v;
  v.entries_ = std::move(entries);
  return v;
}

double ScoreVector::get(ItemId i) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), i,
                             [](const auto& e, ItemId id) { return e.first < id; });
  return (it != entries_.end() && it->first == i) ? it->second : 0.0;
}

RecommendationList top_k(const ScoreVector& scores, int k,
                         std::span<const ItemId> exclude) {
  if (k <= 0) return {};
  std::vector<ItemId> ex(exclude.begin(), exclude.end());
  std::sort(ex.begin(), ex.end());
  std::vector<std::pair<ItemId, double>> cand;
  cand.reserve(scores.entries().size());
  for (const auto& e : scores.entries())
    if (!std::binary_search(ex.begin(), ex.end(), e.first)) cand.push_back(e);
  std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (cand.size() > static_cast<std::size_t>(k)) cand.resize(k);
  RecommendationList out;
  out.reserve(cand.size());
  for (const auto& e : cand) out.push_back(e.first);
  return out;
}

namespace {

ScoreVector entries_from_accumulator(const std::vector<double>& acc,
                                     std::vector<ItemId>& touched) {
  std::sort(touched.begin(), touched.end());
  std::vector<std::pair<ItemId, double>> entries;
  entries.reserve(touched.size());
  for (ItemId i : touched) entries.emplace_back(i, acc[i]);
  return ScoreVector::from_entries(std::move(entries));
}

}  // namespace

ScoreVector cosine_cf_scores(const ProfileView& profile, const Snapshot& s,
                             CosineVariant variant) {
  if (profile.empty()) return {};
  std::vector<int> common(s.n_user_slots(), 0);
  std::vector<UserId> co_users;
  for (ItemId j : profile) {
    for (UserId v : s.users_of(j)) {
      if (v == profile.user()) continue;
      if (common[v]++ == 0) co_users.push_back(v);
    }
  }
  if (co_users.empty()) return {};
  std::sort(co_users.begin(), co_users.end());
  const double norm_u = std::sqrt(static_cast<double>(profile.size()));
  std::vector<double> acc(s.n_item_slots(), 0.0);
  std::vector<ItemId> touched;
  for (UserId v : co_users) {
    const double norm_v = std::sqrt(static_cast<double>(s.degree(v)));
    const double denom = variant == CosineVariant::kDamped
                             ? std::sqrt(norm_u * norm_v)
                             : norm_u * norm_v;
    const double sim = common[v] / denom;
    for (ItemId i : s.items_of(v)) {
      if (acc[i] == 0.0) touched.push_back(i);
      acc[i] += sim;
    }
  }
  return entries_from_accumulator(acc, touched);
}

ScoreVector naive_cf_scores(const ProfileView& profile, const Snapshot& s) {
  if (profile.empty()) return {};
  std::vector<double> best(s.n_item_slots(), 0.0);
  std::vector<int> count(s.n_item_slots(), 0);
  std::vector<ItemId> support;
  std::vector<ItemId> touched;
  for (ItemId j : profile) {
    touched.clear();
    for (UserId v : s.users_of(j))
      for (ItemId i : s.items_of(v)) {
        if (count[i]++ == 0) touched.push_back(i);
      }
    const double deg_j = static_cast<double>(s.item_degree(j));
    for (ItemId i : touched) {
      const double score = count[i] / deg_j;
      if (best[i] == 0.0) support.push_back(i);
      if (score > best[i]) best[i] = score;
      count[i] = 0;
    }
  }
  return entries_from_accumulator(best, support);
}

ConstantRecommender::ConstantRecommender(std::vector<ItemId> items,
                                         std::string name)
    : items_(std::move(items)), name_(std::move(name)) {
  if (items_.empty())
    throw std::invalid_argument("ConstantRecommender: empty item list");
  std::vector<ItemId> sorted = items_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("ConstantRecommender: duplicate item in list");
}

RecommendationList ConstantRecommender::recommend(const ProfileView&,
                                                  const Snapshot&,
                                                  int k) const {
  if (k <= 0) return {};
  const std::size_t n = std::min(items_.size(), static_cast<std::size_t>(k));
  return {items_.begin(), items_.begin() + n};
}

CosineCfRecommender::CosineCfRecommender(CosineVariant variant)
    : variant_(variant) {}

std::string CosineCfRecommender::name() const {
  return variant_ == CosineVariant::kDamped ? "cosine" : "cosine:standard";
}

RecommendationList CosineCfRecommender::recommend(const ProfileView& profile,
                                                  const Snapshot& s,
                                                  int k) const {
  const auto owned = profile.items();
  return top_k(cosine_cf_scores(profile, s, variant_), k, owned);
}

RecommendationList NaiveCfRecommender::recommend(const ProfileView& profile,
                                                 const Snapshot& s,
                                                 int k) const {
  const auto owned = profile.items();
  return top_k(naive_cf_scores(profile, s), k, owned);
}

RecommendationList PopularityRecommender::recommend(const ProfileView& profile,
                                                    const Snapshot& s,
                                                    int k) const {
  std::vector<std::pair<ItemId, double>> entries;
  entries.reserve(s.items().size());
  for (ItemId i : s.items())
    entries.emplace_back(i, static_cast<double>(s.item_degree(i)));
  const auto owned = profile.items();
  return top_k(ScoreVector::from_entries(std::move(entries)), k, owned);
}

namespace {

// Top-k ids by count, ties to the smaller id; zero counts never qualify.
std::vector<ItemId> top_by_count(const std::vector<std::int64_t>& counts,
                                 int k) {
  std::vector<ItemId> ids;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0) ids.push_back(static_cast<ItemId>(i));
  std::sort(ids.begin(), ids.end(), [&](ItemId a, ItemId b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return a < b;
  });
  if (ids.size() > static_cast<std::size_t>(k)) ids.resize(k);
  return ids;
}

std::unique_ptr<Recommender> make_constant(std::string_view arg,
                                           const InteractionLog& log,
                                           std::string name) {
  std::vector<ItemId> items;
  for (const std::string& tok : text::split(arg, ',')) {
    const std::string label(text::trim(tok));
    auto id = log.find_item(label);
    if (!id)
      throw std::invalid_argument("recommender spec names unknown item '" +
                                  label + "'");
    items.push_back(*id);
  }
  return std::make_unique<ConstantRecommender>(std::move(items),
                                               std::move(name));
}

std::unique_ptr<Recommender> make_campaign_top(int k,
                                               const InteractionLog& log,
                                               std::string name) {
  std::vector<std::int64_t> counts(log.n_items(), 0);
  for (const Interaction& e : log.interactions())
    if (e.source.is_campaign()) ++counts[e.item];
  auto ids = top_by_count(counts, k);
  if (ids.empty())
    throw std::invalid_argument(
        "campaign_top: the log has no campaign-sourced events");
  return std::make_unique<ConstantRecommender>(std::move(ids), std::move(name));
}

std::unique_ptr<Recommender> make_organic_top(int k, Timestamp t,
                                              const InteractionLog& log,
                                              std::string name) {
  std::vector<bool> campaigned(log.n_items(), false);
  for (const Interaction& e : log.interactions())
    if (e.source.is_campaign()) campaigned[e.item] = true;
  const Snapshot s = snapshot_at(log, t);
  std::vector<std::int64_t> counts(log.n_items(), 0);
  for (ItemId i : s.items())
    if (!campaigned[i]) counts[i] = s.item_degree(i);
  auto ids = top_by_count(counts, k);
  if (ids.empty())
    throw std::invalid_argument(
        "organic_top: no never-campaigned item present at the given time");
  return std::make_unique<ConstantRecommender>(std::move(ids), std::move(name));
}

}  // namespace

std::unique_ptr<Recommender> make_recommender(std::string_view spec,
                                              const InteractionLog& log) {
  const std::string_view sv = text::trim(spec);
  const std::size_t colon = sv.find(':');
  const std::string_view head = sv.substr(0, colon);
  const std::string_view arg =
      colon == std::string_view::npos ? std::string_view{} : sv.substr(colon + 1);
  if (head == "constant") {
    if (arg.empty())
      throw std::invalid_argument("constant recommender needs an item list");
    return make_constant(arg, log, std::string(sv));
  }
  if (head == "cosine") {
    if (arg.empty() || arg == "damped")
      return std::make_unique<CosineCfRecommender>(CosineVariant::kDamped);
    if (arg == "standard")
      return std::make_unique<CosineCfRecommender>(CosineVariant::kStandard);
    throw std::invalid_argument("unknown cosine variant '" + std::string(arg) +
                                "'");
  }
  if (head == "naive") return std::make_unique<NaiveCfRecommender>();
  if (head == "popular") return std::make_unique<PopularityRecommender>();
  if (head == "campaign_top") {
    const int k = static_cast<int>(text::parse_int(arg, "campaign_top k"));
    if (k <= 0) throw std::invalid_argument("campaign_top: k must be > 0");
    return make_campaign_top(k, log, std::string(sv));
  }
  if (head == "organic_top") {
    const std::size_t at = arg.find('@');
    if (at == std::string_view::npos)
      throw std::invalid_argument("organic_top spec must look like 'organic_top:<k>@<t>'");
    const int k =
        static_cast<int>(text::parse_int(arg.substr(0, at), "organic_top k"));
    const double t = text::parse_double(arg.substr(at + 1), "organic_top time");
    if (k <= 0) throw std::invalid_argument("organic_top: k must be > 0");
    return make_organic_top(k, t, log, std::string(sv));
  }
  throw std::invalid_argument("unknown recommender spec '" + std::string(sv) +
                              "'");
}

}  // namespace offeval
