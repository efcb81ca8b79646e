#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "offeval/interaction_log.hpp"
#include "offeval/types.hpp"

namespace offeval {

class ProfileView;

// Immutable bipartite graph of all edges with timestamp <= t, indexed from
// both sides (user -> items and item -> users, adjacency sorted ascending).
// Slot counts cover the full universe of the source log so ids stay valid
// even for users or items with no edge yet; n_users()/n_items() count only
// the entities actually present at t.
class Snapshot {
 public:
  Timestamp time() const { return time_; }
  std::int64_t n_edges() const { return n_edges_; }

  int n_user_slots() const { return static_cast<int>(user_off_.size()) - 1; }
  int n_item_slots() const { return static_cast<int>(item_off_.size()) - 1; }
  int n_users() const { return static_cast<int>(present_users_.size()); }
  int n_items() const { return static_cast<int>(present_items_.size()); }

  std::span<const ItemId> items_of(UserId u) const;
  std::span<const UserId> users_of(ItemId i) const;
  int degree(UserId u) const { return static_cast<int>(items_of(u).size()); }
  int item_degree(ItemId i) const {
    return static_cast<int>(users_of(i).size());
  }
  bool has_edge(UserId u, ItemId i) const;

  // Present entities (degree >= 1), ascending.
  std::span<const UserId> users() const { return present_users_; }
  std::span<const ItemId> items() const { return present_items_; }

  ProfileView profile(UserId u) const;

  // Order-sensitive digest of time, shape and adjacency.
  std::uint64_t content_hash() const;

 private:
  friend Snapshot snapshot_at(const InteractionLog& log, Timestamp t);
  friend Snapshot load_snapshot(const std::string& path);
  static Snapshot build(Timestamp t, int n_user_slots, int n_item_slots,
                        std::span<const std::pair<UserId, ItemId>> edges);

  Timestamp time_ = 0.0;
  std::int64_t n_edges_ = 0;
  std::vector<std::int64_t> user_off_{0};
  std::vector<std::int64_t> item_off_{0};
  std::vector<ItemId> user_items_;
  std::vector<UserId> item_users_;
  std::vector<UserId> present_users_;
  std::vector<ItemId> present_items_;
};

// A user's profile with one item optionally hidden, backed by the snapshot's
// adjacency (nothing is copied). This is the leave-one-out view handed to
// recommenders: only the owner's vector changes, every other structure still
// reads from the intact snapshot.
class ProfileView {
 public:
  ProfileView(const Snapshot& snapshot, UserId user);
  ProfileView(const Snapshot& snapshot, UserId user, ItemId excluded);

  class iterator {
   public:
    using value_type = ItemId;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(const ItemId* p, const ItemId* end, ItemId skip)
        : p_(p), end_(end), skip_(skip) {
      if (p_ != end_ && *p_ == skip_) ++p_;
    }
    ItemId operator*() const { return *p_; }
    iterator& operator++() {
      ++p_;
      if (p_ != end_ && *p_ == skip_) ++p_;
      return *this;
    }
    iterator operator++(int) {
      iterator t = *this;
      ++*this;
      return t;
    }
    bool operator==(const iterator&) const = default;

   private:
    const ItemId* p_ = nullptr;
    const ItemId* end_ = nullptr;
    ItemId skip_ = -1;
  };

  iterator begin() const { return {items_.data(), items_.data() + items_.size(), skip_}; }
  iterator end() const {
    const ItemId* e = items_.data() + items_.size();
    return {e, e, skip_};
  }

  UserId user() const { return user_; }
  int size() const { return size_; }
  bool empty() const { return size_ == 0; }
  bool contains(ItemId i) const;
  std::optional<ItemId> excluded_item() const;
  const Snapshot& snapshot() const { return *snapshot_; }
  std::vector<ItemId> items() const { return {begin(), end()}; }

 private:
  const Snapshot* snapshot_;
  UserId user_;
  std::span<const ItemId> items_;
  ItemId skip_ = -1;  // -1 means nothing hidden
  int size_ = 0;
};

// All edges of `log` with timestamp <= t.
Snapshot snapshot_at(const InteractionLog& log, Timestamp t);

// Leave-one-out view u_{-i}. The edge (u, i) must exist in the snapshot.
ProfileView remove_item_view(const Snapshot& s, UserId u, ItemId i);

// Profile size -> number of users with that size, present users only.
std::map<int, int> degree_histogram(const Snapshot& s);

// Versioned edge-list file, dense ids. load_snapshot rejects files whose
// format tag it does not know.
void save_snapshot(const Snapshot& s, const std::string& path);
Snapshot load_snapshot(const std::string& path);

}  // namespace offeval
