#include "offeval/interaction_log.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "offeval/text.hpp"

namespace offeval {

namespace {

std::string to_label(int v) { return std::to_string(v); }

}  // namespace

InteractionLog InteractionLog::with_universe(int n_users, int n_items) {
  if (n_users < 0 || n_items < 0)
    throw std::invalid_argument("with_universe: negative universe size");
  InteractionLog log;
  log.user_labels_.reserve(n_users);
  log.item_labels_.reserve(n_items);
  for (int u = 0; u < n_users; ++u) {
    log.user_labels_.push_back(to_label(u));
    log.user_ids_.emplace(log.user_labels_.back(), u);
  }
  for (int i = 0; i < n_items; ++i) {
    log.item_labels_.push_back(to_label(i));
    log.item_ids_.emplace(log.item_labels_.back(), i);
  }
  return log;
}

std::uint64_t InteractionLog::edge_key(UserId u, ItemId i) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(i);
}

bool InteractionLog::add(UserId user, ItemId item, Timestamp t, Source source) {
  check_user(user);
  check_item(item);
  if (!std::isfinite(t) || t < 0.0)
    throw std::invalid_argument("add: timestamp must be finite and >= 0");
  if (!interactions_.empty() && t < interactions_.back().timestamp)
    throw std::invalid_argument("add: timestamps must be non-decreasing");
  if (!edges_.insert(edge_key(user, item)).second) return false;
  interactions_.push_back({user, item, t, source});
  return true;
}

bool InteractionLog::has_edge(UserId user, ItemId item) const {
  check_user(user);
  check_item(item);
  return edges_.contains(edge_key(user, item));
}

Timestamp InteractionLog::last_timestamp() const {
  return interactions_.empty() ? 0.0 : interactions_.back().timestamp;
}

const std::string& InteractionLog::user_label(UserId u) const {
  check_user(u);
  return user_labels_[u];
}

const std::string& InteractionLog::item_label(ItemId i) const {
  check_item(i);
  return item_labels_[i];
}

std::optional<UserId> InteractionLog::find_user(const std::string& label) const {
  auto it = user_ids_.find(label);
  if (it == user_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<ItemId> InteractionLog::find_item(const std::string& label) const {
  auto it = item_ids_.find(label);
  if (it == item_ids_.end()) return std::nullopt;
  return it->second;
}

UserId InteractionLog::intern_user(const std::string& label) {
  auto it = user_ids_.find(label);
  if (it != user_ids_.end()) return it->second;
  const UserId id = static_cast<UserId>(user_labels_.size());
  user_labels_.push_back(label);
  user_ids_.emplace(label, id);
  return id;
}

ItemId InteractionLog::intern_item(const std::string& label) {
  auto it = item_ids_.find(label);
  if (it != item_ids_.end()) return it->second;
  const ItemId id = static_cast<ItemId>(item_labels_.size());
  item_labels_.push_back(label);
  item_ids_.emplace(label, id);
  return id;
}

void InteractionLog::check_user(UserId u) const {
  if (u < 0 || u >= n_users())
    throw std::out_of_range("user id " + std::to_string(u) +
                            " outside universe of " + std::to_string(n_users()));
}

void InteractionLog::check_item(ItemId i) const {
  if (i < 0 || i >= n_items())
    throw std::out_of_range("item id " + std::to_string(i) +
                            " outside universe of " + std::to_string(n_items()));
}

namespace {

[[noreturn]] void parse_fail(std::string_view origin, std::size_t line_no,
                             const std::string& what) {
  throw std::runtime_error(std::string(origin) + ":" +
                           std::to_string(line_no) + ": " + what);
}

}  // namespace

InteractionLog load_log(std::istream& in, std::string_view origin) {
  InteractionLog log;
  std::vector<Interaction> rows;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = text::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    if (!saw_header) {
      if (!text::starts_with(sv, "user_id,"))
        parse_fail(origin, line_no, "expected header starting with 'user_id,'");
      saw_header = true;
      continue;
    }
    auto fields = text::split(sv, ',');
    if (fields.size() != 4 && fields.size() != 5)
      parse_fail(origin, line_no,
                 "expected 4 or 5 fields, got " + std::to_string(fields.size()));
    const std::string user_label(text::trim(fields[0]));
    const std::string item_label(text::trim(fields[1]));
    if (user_label.empty() || item_label.empty())
      parse_fail(origin, line_no, "empty user or item id");
    Interaction row;
    try {
      row.timestamp = text::parse_double(fields[2], "timestamp");
    } catch (const std::exception& e) {
      parse_fail(origin, line_no, e.what());
    }
    if (!std::isfinite(row.timestamp) || row.timestamp < 0.0)
      parse_fail(origin, line_no, "timestamp must be finite and >= 0");
    const std::string_view source = text::trim(fields[3]);
    if (source == "organic") {
      if (fields.size() == 5 && !text::trim(fields[4]).empty())
        parse_fail(origin, line_no, "organic row with a campaign_id");
      row.source = Source::organic();
    } else if (source == "campaign") {
      if (fields.size() != 5)
        parse_fail(origin, line_no, "campaign row without campaign_id");
      long long id = 0;
      try {
        id = text::parse_int(fields[4], "campaign_id");
      } catch (const std::exception& e) {
        parse_fail(origin, line_no, e.what());
      }
      if (id < 0) parse_fail(origin, line_no, "campaign_id must be >= 0");
      row.source = Source::campaign(static_cast<std::int32_t>(id));
    } else {
      parse_fail(origin, line_no,
                 "unknown source '" + std::string(source) + "'");
    }
    row.user = log.intern_user(user_label);
    row.item = log.intern_item(item_label);
    rows.push_back(row);
  }
  if (!saw_header && line_no > 0)
    parse_fail(origin, line_no, "no header row found");
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Interaction& a, const Interaction& b) {
                     return a.timestamp < b.timestamp;
                   });
  for (const Interaction& row : rows) {
    if (!log.edges_.insert(InteractionLog::edge_key(row.user, row.item)).second)
      continue;  // duplicate edge, earliest occurrence wins
    log.interactions_.push_back(row);
  }
  return log;
}

InteractionLog load_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open log file: " + path);
  return load_log(in, path);
}

void save_log(const InteractionLog& log, std::ostream& out) {
  out << "# offeval-log v1\n";
  out << "user_id,item_id,timestamp,source,campaign_id\n";
  for (const Interaction& e : log.interactions()) {
    out << log.user_label(e.user) << ',' << log.item_label(e.item) << ','
        << text::format_double(e.timestamp);
    if (e.source.is_campaign())
      out << ",campaign," << e.source.campaign_id;
    else
      out << ",organic";
    out << '\n';
  }
  if (!out) throw std::runtime_error("error while writing log");
}

void save_log_file(const InteractionLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open log file for write: " + path);
  save_log(log, out);
}

}  // namespace offeval
