#pragma once

// Flat key-value configuration with [section] headers:
//
//   # comment
//   [form]
//   gradient = 1 + t/2
//
// Numeric values accept constant expressions ("pi/2", "1e-3").

#include <algorithm>
#include <cmath>
#include <fstream>
#include <locale>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nlwave/expression.hpp"
#include "nlwave/types.hpp"

namespace nlwave {

class IniDocument {
 public:
  using Section = std::vector<std::pair<std::string, std::string>>;

  static IniDocument parse(const std::string& text, const std::string& origin = "<config>") {
    IniDocument doc;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const std::string s = trim(line);
      if (s.empty() || s[0] == '#' || s[0] == ';') continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
        section = trim(s.substr(1, s.size() - 2));
        if (section.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
        doc.touch(section);
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
      if (section.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": key outside any section");
      const std::string key = trim(s.substr(0, eq));
      if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      if (doc.has(section, key))
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "' in [" + section + "]");
      doc.set(section, key, trim(s.substr(eq + 1)));
    }
    return doc;
  }

  static IniDocument load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open configuration file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse(ss.str(), path);
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto* s = find(section);
    if (!s) return false;
    return std::any_of(s->begin(), s->end(), [&](const auto& kv) { return kv.first == key; });
  }
  bool has_section(const std::string& section) const { return find(section) != nullptr; }

  const std::string& get(const std::string& section, const std::string& key) const {
    if (const auto* s = find(section))
      for (const auto& kv : *s)
        if (kv.first == key) return kv.second;
    throw ConfigError("missing key '" + key + "' in [" + section + "]");
  }
  std::string get_or(const std::string& section, const std::string& key, const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
  }

  double number(const std::string& section, const std::string& key) const {
    return parse_number(get(section, key), section + "." + key);
  }
  double number_or(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? number(section, key) : fallback;
  }
  int integer_or(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    const double v = number(section, key);
    if (v != std::floor(v) || std::abs(v) > 1e9)
      throw ConfigError(section + "." + key + ": expected an integer, got " + get(section, key));
    return static_cast<int>(v);
  }
  bool boolean_or(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string& v = get(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(section + "." + key + ": expected true or false, got " + v);
  }
  std::vector<int> integer_list(const std::string& section, const std::string& key) const {
    std::vector<int> out;
    std::stringstream ss(get(section, key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const double v = parse_number(trim(item), section + "." + key);
      if (v != std::floor(v)) throw ConfigError(section + "." + key + ": expected integers");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    auto& s = touch(section);
    for (auto& kv : s)
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    s.emplace_back(key, value);
  }

  /// Keys of a section that are not in `known` (typos are configuration errors).
  void reject_unknown(const std::string& section, const std::vector<std::string>& known) const {
    if (const auto* s = find(section))
      for (const auto& kv : *s)
        if (std::find(known.begin(), known.end(), kv.first) == known.end())
          throw ConfigError("unknown key '" + kv.first + "' in [" + section + "]");
  }
  void reject_unknown_sections(const std::vector<std::string>& known) const {
    for (const auto& s : sections_)
      if (std::find(known.begin(), known.end(), s.first) == known.end())
        throw ConfigError("unknown section [" + s.first + "]");
  }

  std::string serialize() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [name, entries] : sections_) {
      if (!first) os << '\n';
      first = false;
      os << '[' << name << "]\n";
      for (const auto& [k, v] : entries) os << k << " = " << v << '\n';
    }
    return os.str();
  }

  static double parse_number(const std::string& text, const std::string& what) {
    try {
      const Expression e = Expression::parse(text);
      if (!e.is_constant()) throw ConfigError(what + ": expected a constant, got '" + text + "'");
      const double v = e(0.0, 0.0, 0.0);
      if (!std::isfinite(v)) throw ConfigError(what + ": value is not finite");
      return v;
    } catch (const ParseError& e) {
      throw ConfigError(what + ": " + e.what());
    }
  }

  static std::string format_number(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << v;
    return os.str();
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

 private:
  const Section* find(const std::string& section) const {
    for (const auto& s : sections_)
      if (s.first == section) return &s.second;
    return nullptr;
  }
  Section& touch(const std::string& section) {
    for (auto& s : sections_)
      if (s.first == section) return s.second;
    sections_.emplace_back(section, Section{});
    return sections_.back().second;
  }

  std::vector<std::pair<std::string, Section>> sections_;
};

}  // namespace nlwave
