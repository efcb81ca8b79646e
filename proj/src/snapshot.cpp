#include "offeval/snapshot.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <stdexcept>

#include "offeval/text.hpp"

namespace offeval {

namespace {

void check_range(int v, int n, const char* what) {
  if (v < 0 || v >= n)
    throw std::out_of_range(std::string(what) + " id " + std::to_string(v) +
                            " outside snapshot with " + std::to_string(n) +
                            " slots");
}

std::uint64_t hash_accumulate(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

Snapshot Snapshot::build(Timestamp t, int n_user_slots, int n_item_slots,
                         std::span<const std::pair<UserId, ItemId>> edges) {
  Snapshot s;
  s.time_ = t;
  s.n_edges_ = static_cast<std::int64_t>(edges.size());
  s.user_off_.assign(n_user_slots + 1, 0);
  s.item_off_.assign(n_item_slots + 1, 0);
  for (const auto& [u, i] : edges) {
    ++s.user_off_[u + 1];
    ++s.item_off_[i + 1];
  }
  for (int u = 0; u < n_user_slots; ++u) s.user_off_[u + 1] += s.user_off_[u];
  for (int i = 0; i < n_item_slots; ++i) s.item_off_[i + 1] += s.item_off_[i];
  s.user_items_.resize(edges.size());
  s.item_users_.resize(edges.size());
  std::vector<std::int64_t> ucur(s.user_off_.begin(), s.user_off_.end() - 1);
  std::vector<std::int64_t> icur(s.item_off_.begin(), s.item_off_.end() - 1);
  for (const auto& [u, i] : edges) {
    s.user_items_[ucur[u]++] = i;
    s.item_users_[icur[i]++] = u;
  }
  for (int u = 0; u < n_user_slots; ++u)
    std::sort(s.user_items_.begin() + s.user_off_[u],
              s.user_items_.begin() + s.user_off_[u + 1]);
  for (int i = 0; i < n_item_slots; ++i)
    std::sort(s.item_users_.begin() + s.item_off_[i],
              s.item_users_.begin() + s.item_off_[i + 1]);
  for (int u = 0; u < n_user_slots; ++u)
    if (s.user_off_[u + 1] > s.user_off_[u]) s.present_users_.push_back(u);
  for (int i = 0; i < n_item_slots; ++i)
    if (s.item_off_[i + 1] > s.item_off_[i]) s.present_items_.push_back(i);
  return s;
}

Snapshot snapshot_at(const InteractionLog& log, Timestamp t) {
  std::vector<std::pair<UserId, ItemId>> edges;
  // interactions are time-sorted; the prefix <= t is everything we need
  for (const Interaction& e : log.interactions()) {
    if (e.timestamp > t) break;
    edges.emplace_back(e.user, e.item);
  }
  return Snapshot::build(t, log.n_users(), log.n_items(), edges);
}

std::span<const ItemId> Snapshot::items_of(UserId u) const {
  check_range(u, n_user_slots(), "user");
  return {user_items_.data() + user_off_[u],
          static_cast<std::size_t>(user_off_[u + 1] - user_off_[u])};
}

std::span<const UserId> Snapshot::users_of(ItemId i) const {
  check_range(i, n_item_slots(), "item");
  return {item_users_.data() + item_off_[i],
          static_cast<std::size_t>(item_off_[i + 1] - item_off_[i])};
}

bool Snapshot::has_edge(UserId u, ItemId i) const {
  auto row = items_of(u);
  check_range(i, n_item_slots(), "item");
  return std::binary_search(row.begin(), row.end(), i);
}

ProfileView Snapshot::profile(UserId u) const { return {*this, u}; }

std::uint64_t Snapshot::content_hash() const {
  std::uint64_t h = 0x6f666665'76616c31ull;
  h = hash_accumulate(h, std::bit_cast<std::uint64_t>(time_));
  h = hash_accumulate(h, static_cast<std::uint64_t>(n_user_slots()));
  h = hash_accumulate(h, static_cast<std::uint64_t>(n_item_slots()));
  for (std::int64_t off : user_off_)
    h = hash_accumulate(h, static_cast<std::uint64_t>(off));
  for (ItemId i : user_items_)
    h = hash_accumulate(h, static_cast<std::uint64_t>(i));
  return h;
}

ProfileView::ProfileView(const Snapshot& snapshot, UserId user)
    : snapshot_(&snapshot), user_(user), items_(snapshot.items_of(user)) {
  size_ = static_cast<int>(items_.size());
}

ProfileView::ProfileView(const Snapshot& snapshot, UserId user, ItemId excluded)
    : snapshot_(&snapshot), user_(user), items_(snapshot.items_of(user)) {
  if (!std::binary_search(items_.begin(), items_.end(), excluded))
    throw std::invalid_argument("remove_item_view: user " +
                                std::to_string(user) + " does not hold item " +
                                std::to_string(excluded));
  skip_ = excluded;
  size_ = static_cast<int>(items_.size()) - 1;
}

bool ProfileView::contains(ItemId i) const {
  if (i == skip_) return false;
  return std::binary_search(items_.begin(), items_.end(), i);
}

std::optional<ItemId> ProfileView::excluded_item() const {
  if (skip_ < 0) return std::nullopt;
  return skip_;
}

ProfileView remove_item_view(const Snapshot& s, UserId u, ItemId i) {
  return {s, u, i};
}

std::map<int, int> degree_histogram(const Snapshot& s) {
  std::map<int, int> hist;
  for (UserId u : s.users()) ++hist[s.degree(u)];
  return hist;
}

void save_snapshot(const Snapshot& s, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open snapshot file for write: " + path);
  out << "# offeval-snapshot v1\n";
  out << "# time=" << text::format_double(s.time()) << " user_slots="
      << s.n_user_slots() << " item_slots=" << s.n_item_slots() << '\n';
  out << "user,item\n";
  for (UserId u : s.users())
    for (ItemId i : s.items_of(u)) out << u << ',' << i << '\n';
  if (!out) throw std::runtime_error("error while writing snapshot");
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open snapshot file: " + path);
  std::string line;
  if (!std::getline(in, line) ||
      text::trim(line) != "# offeval-snapshot v1")
    throw std::runtime_error(path + ": not an offeval-snapshot v1 file");
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": truncated snapshot header");
  Timestamp t = 0.0;
  int n_user_slots = -1, n_item_slots = -1;
  for (const std::string& tok : text::split(text::trim(line.substr(1)), ' ')) {
    auto kv = text::split(tok, '=');
    if (kv.size() != 2) continue;
    if (kv[0] == "time") t = text::parse_double(kv[1], "time");
    if (kv[0] == "user_slots")
      n_user_slots = static_cast<int>(text::parse_int(kv[1], "user_slots"));
    if (kv[0] == "item_slots")
      n_item_slots = static_cast<int>(text::parse_int(kv[1], "item_slots"));
  }
  if (n_user_slots < 0 || n_item_slots < 0)
    throw std::runtime_error(path + ": snapshot header missing slot counts");
  std::vector<std::pair<UserId, ItemId>> edges;
  std::size_t line_no = 2;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = text::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    if (!saw_header) {
      if (sv != "user,item")
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected 'user,item' header");
      saw_header = true;
      continue;
    }
    auto fields = text::split(sv, ',');
    if (fields.size() != 2)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 2 fields");
    const int u = static_cast<int>(text::parse_int(fields[0], "user"));
    const int i = static_cast<int>(text::parse_int(fields[1], "item"));
    if (u < 0 || u >= n_user_slots || i < 0 || i >= n_item_slots)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": edge outside declared universe");
    edges.emplace_back(u, i);
  }
  return Snapshot::build(t, n_user_slots, n_item_slots, edges);
}

}  // namespace offeval
