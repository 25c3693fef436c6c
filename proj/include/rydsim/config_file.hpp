// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_CONFIG_FILE_HPP
#define RYDSIM_CONFIG_FILE_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rydsim/errors.hpp"

namespace rydsim {

/// Plain-text configuration: `[section]` headers followed by `key = value`
/// lines, `#` comments. Entries keep file order so an echo of a parsed file
/// is byte-stable.
class KeyValueFile {
 public:
  KeyValueFile() = default;

  static KeyValueFile parse_text(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string s = strip(line);
      if (s.empty() || s[0] == '#') continue;
      if (s.front() == '[') {
        if (s.back() != ']')
          throw InvalidArgument("config line " + std::to_string(lineno) +
                                ": malformed section header: " + s);
        section = strip(s.substr(1, s.size() - 2));
        continue;
      }
      auto eq = s.find('=');
      if (eq == std::string::npos)
        throw InvalidArgument("config line " + std::to_string(lineno) +
                              ": expected key = value: " + s);
      kv.entries_.push_back({section, strip(s.substr(0, eq)), strip(s.substr(eq + 1))});
    }
    return kv;
  }

  static KeyValueFile parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
  }

  bool has(const std::string& section, const std::string& key) const {
    for (const auto& e : entries_)
      if (e.section == section && e.key == key) return true;
    return false;
  }

  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const {
    for (const auto& e : entries_)
      if (e.section == section && e.key == key) return e.value;
    return fallback;
  }

  double get_double(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
      throw InvalidArgument("config [" + section + "] " + key + ": not a number: " + v);
    return d;
  }

  long long get_int(const std::string& section, const std::string& key, long long fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get(section, key, "");
    char* end = nullptr;
    long long i = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
      throw InvalidArgument("config [" + section + "] " + key + ": not an integer: " + v);
    return i;
  }

  bool get_flag(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get(section, key, "");
    if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
    if (v == "off" || v == "false" || v == "0" || v == "no") return false;
    throw InvalidArgument("config [" + section + "] " + key + ": not a flag: " + v);
  }

  /// Comma-separated list of doubles.
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<double> out;
    std::istringstream ss(get(section, key, ""));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = strip(item);
      if (item.empty()) continue;
      char* end = nullptr;
      double d = std::strtod(item.c_str(), &end);
      if (end == item.c_str() || *end != '\0')
        throw InvalidArgument("config [" + section + "] " + key + ": bad list item: " + item);
      out.push_back(d);
    }
    return out;
  }

  std::vector<std::string> get_names(const std::string& section, const std::string& key,
                                     const std::vector<std::string>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<std::string> out;
    std::istringstream ss(get(section, key, ""));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = strip(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    for (auto& e : entries_) {
      if (e.section == section && e.key == key) {
        e.value = value;
        return;
      }
    }
    entries_.push_back({section, key, value});
  }

  /// Canonical text form (used for `config.echo`).
  std::string echo() const {
    std::string out;
    std::string current = "\x01";  // never a real section name
    for (const auto& e : entries_) {
      if (e.section != current) {
        if (!out.empty()) out += "\n";
        out += "[" + e.section + "]\n";
        current = e.section;
      }
      out += e.key + " = " + e.value + "\n";
    }
    return out;
  }

 private:
  struct Entry {
    std::string section, key, value;
  };
  std::vector<Entry> entries_;

  static std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }
};

/// printf-style float formatting: shortest text that round-trips a double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace rydsim

#endif  // RYDSIM_CONFIG_FILE_HPP
