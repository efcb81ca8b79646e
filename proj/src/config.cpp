#include "offeval/config.hpp"

#include <fstream>
#include <istream>

#include "offeval/text.hpp"

namespace offeval {

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse(in, path);
}

Config Config::parse(std::istream& in, std::string origin) {
  Config cfg;
  cfg.origin_ = std::move(origin);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = text::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    if (sv.front() == '[') {
      if (sv.back() != ']')
        throw ConfigError(cfg.origin_ + ":" + std::to_string(line_no) +
                          ": unterminated section header");
      section = std::string(text::trim(sv.substr(1, sv.size() - 2)));
      continue;
    }
    const std::size_t eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(cfg.origin_ + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    std::string key(text::trim(sv.substr(0, eq)));
    std::string value(text::trim(sv.substr(eq + 1)));
    if (key.empty())
      throw ConfigError(cfg.origin_ + ":" + std::to_string(line_no) +
                        ": empty key");
    bool replaced = false;
    for (Entry& e : cfg.entries_)
      if (e.section == section && e.key == key) {
        e.value = std::move(value);
        replaced = true;
        break;
      }
    if (!replaced) cfg.entries_.push_back({section, key, std::move(value)});
  }
  return cfg;
}

const std::string* Config::find(const std::string& section,
                                const std::string& key) const {
  for (const Entry& e : entries_)
    if (e.section == section && e.key == key) return &e.value;
  return nullptr;
}

void Config::missing(const std::string& section, const std::string& key) const {
  throw ConfigError(origin_ + ": missing required key '" +
                    (section.empty() ? key : section + "." + key) + "'");
}

bool Config::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const std::string& Config::get(const std::string& section,
                               const std::string& key) const {
  const std::string* v = find(section, key);
  if (!v) missing(section, key);
  return *v;
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  const std::string* v = find(section, key);
  return v ? *v : fallback;
}

namespace {

template <typename F>
auto parse_as(const std::string& origin, const std::string& section,
              const std::string& key, const std::string& value, F parse) {
  try {
    return parse(value);
  } catch (const std::exception& e) {
    throw ConfigError(origin + ": key '" + section + "." + key + "': " +
                      e.what());
  }
}

}  // namespace

long long Config::get_int(const std::string& section,
                          const std::string& key) const {
  return parse_as(origin_, section, key, get(section, key),
                  [](const std::string& v) { return text::parse_int(v, "int"); });
}

long long Config::get_int_or(const std::string& section,
                             const std::string& key, long long fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

double Config::get_double(const std::string& section,
                          const std::string& key) const {
  return parse_as(origin_, section, key, get(section, key),
                  [](const std::string& v) { return text::parse_double(v, "number"); });
}

double Config::get_double_or(const std::string& section,
                             const std::string& key, double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::uint64_t Config::get_u64_or(const std::string& section,
                                 const std::string& key,
                                 std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  return parse_as(origin_, section, key, get(section, key),
                  [](const std::string& v) { return text::parse_u64(v, "seed"); });
}

std::vector<std::string> Config::get_list(const std::string& section,
                                          const std::string& key) const {
  std::vector<std::string> out;
  const std::string* v = find(section, key);
  if (!v) return out;
  for (const std::string& tok : text::split(*v, ',')) {
    std::string t(text::trim(tok));
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> Config::section_items(
    const std::string& section) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Entry& e : entries_)
    if (e.section == section) out.emplace_back(e.key, e.value);
  return out;
}

}  // namespace offeval
