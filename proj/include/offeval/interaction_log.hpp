#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "offeval/types.hpp"

namespace offeval {

// Where an interaction came from. Campaign events keep the campaign id so a
// history can later be sliced by attribution.
struct Source {
  enum class Kind { kOrganic, kCampaign };

  Kind kind = Kind::kOrganic;
  std::int32_t campaign_id = -1;

  static Source organic() { return {}; }
  static Source campaign(std::int32_t id) { return {Kind::kCampaign, id}; }
  bool is_campaign() const { return kind == Kind::kCampaign; }
  bool operator==(const Source&) const = default;
};

struct Interaction {
  UserId user = 0;
  ItemId item = 0;
  Timestamp timestamp = 0.0;
  Source source;
};

// Timestamp-ordered (user, item) events over dense interned ids. The external
// ids seen at ingestion are kept in sidecar label tables; everything else in
// the library speaks dense ids. A (user, item) pair appears at most once and
// keeps its earliest timestamp.
class InteractionLog {
 public:
  InteractionLog() = default;

  // Fixed universe with decimal labels "0".."n-1". Used by the simulator and
  // by tests that want ids without going through a file.
  static InteractionLog with_universe(int n_users, int n_items);

  // Appends one event. Timestamps must be non-decreasing across calls.
  // Returns false (and changes nothing) if the edge already exists.
  bool add(UserId user, ItemId item, Timestamp t, Source source);

  std::span<const Interaction> interactions() const { return interactions_; }
  std::size_t size() const { return interactions_.size(); }
  bool empty() const { return interactions_.empty(); }

  int n_users() const { return static_cast<int>(user_labels_.size()); }
  int n_items() const { return static_cast<int>(item_labels_.size()); }

  bool has_edge(UserId user, ItemId item) const;
  Timestamp last_timestamp() const;

  const std::string& user_label(UserId u) const;
  const std::string& item_label(ItemId i) const;
  std::optional<UserId> find_user(const std::string& label) const;
  std::optional<ItemId> find_item(const std::string& label) const;

 private:
  friend InteractionLog load_log(std::istream& in, std::string_view origin);

  UserId intern_user(const std::string& label);
  ItemId intern_item(const std::string& label);
  void check_user(UserId u) const;
  void check_item(ItemId i) const;
  static std::uint64_t edge_key(UserId u, ItemId i);

  std::vector<Interaction> interactions_;
  std::vector<std::string> user_labels_;
  std::vector<std::string> item_labels_;
  std::unordered_map<std::string, UserId> user_ids_;
  std::unordered_map<std::string, ItemId> item_ids_;
  std::unordered_set<std::uint64_t> edges_;
};

// CSV with header `user_id,item_id,timestamp,source,campaign_id`; the
// campaign_id field is present only on campaign rows. Lines starting with '#'
// are comments. Rows may arrive in any time order; duplicates of a (user,
// item) pair collapse to the earliest occurrence. Malformed input raises
// std::runtime_error naming the offending line.
InteractionLog load_log(std::istream& in, std::string_view origin = "<stream>");
InteractionLog load_log_file(const std::string& path);
void save_log(const InteractionLog& log, std::ostream& out);
void save_log_file(const InteractionLog& log, const std::string& path);

}  // namespace offeval
