#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace offeval {

// Anything wrong with a config file: missing, unparsable, bad or absent
// keys. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat INI-style `key = value` pairs under [section] headers. Full-line '#'
// comments. A repeated key inside one section keeps the last value. Keys
// before the first section header live in the section "".
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse(std::istream& in, std::string origin);

  bool has(const std::string& section, const std::string& key) const;
  const std::string& get(const std::string& section,
                         const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;

  long long get_int(const std::string& section, const std::string& key) const;
  long long get_int_or(const std::string& section, const std::string& key,
                       long long fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                           std::uint64_t fallback) const;

  // Comma-separated value, trimmed, empty tokens dropped. Missing key means
  // the empty list.
  std::vector<std::string> get_list(const std::string& section,
                                    const std::string& key) const;

  // All (key, value) pairs of a section in file order.
  std::vector<std::pair<std::string, std::string>> section_items(
      const std::string& section) const;

  const std::string& origin() const { return origin_; }

 private:
  struct Entry {
    std::string section, key, value;
  };
  const std::string* find(const std::string& section,
                          const std::string& key) const;
  [[noreturn]] void missing(const std::string& section,
                            const std::string& key) const;

  std::vector<Entry> entries_;
  std::string origin_;
};

}  // namespace offeval
