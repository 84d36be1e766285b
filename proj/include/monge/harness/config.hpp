#pragma once

// Flat `key = value` configuration files.
//
//   # comment
//   experiment = gaussian2d
//   train.outer_steps = 2000
//   source.mean = 0, 0
//
// Keys are unique; lists are comma-separated. Every key must be consumed by the
// experiment builder, so typos surface as errors instead of silent defaults.

#include "monge/error.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace monge::harness {

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& origin = "<config>") {
    KeyValueConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string body = trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      require(eq != std::string::npos, ErrorCode::kParse,
              origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      require(!key.empty(), ErrorCode::kParse, origin + ":" + std::to_string(line_no) + ": empty key");
      require(!cfg.values_.count(key), ErrorCode::kParse,
              origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
      cfg.values_[key] = value;
      cfg.lines_[key] = line_no;
    }
    cfg.origin_ = origin;
    return cfg;
  }

  static KeyValueConfig parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::kIo, "cannot open config " + path);
    return parse(in, path);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    used_.insert(key);
    return it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return to_double(key, get_string(key, ""));
  }

  int get_int(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const double v = get_double(key, 0.0);
    require(v == static_cast<double>(static_cast<long long>(v)), ErrorCode::kParse, where(key) + ": expected an integer");
    return static_cast<int>(v);
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get_string(key, "");
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw Error(ErrorCode::kParse, where(key) + ": expected a boolean, got '" + v + "'");
  }

  std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    std::stringstream ss(get_string(key, ""));
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const std::string c = trim(cell);
      if (!c.empty()) out.push_back(to_double(key, c));
    }
    return out;
  }

  std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) const {
    if (!has(key)) return fallback;
    std::vector<int> out;
    for (double v : get_list(key, {})) {
      require(v == static_cast<double>(static_cast<long long>(v)), ErrorCode::kParse, where(key) + ": expected integers");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  /// All keys under `prefix.` with the prefix stripped.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (k.rfind(prefix + ".", 0) == 0) out.push_back(k.substr(prefix.size() + 1));
    return out;
  }

  /// Throws on the first key nobody read.
  void require_all_used() const {
    for (const auto& [k, v] : values_)
      require(used_.count(k) != 0, ErrorCode::kInvalidArgument, where(k) + ": unknown key '" + k + "'");
  }

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  std::string where(const std::string& key) const {
    const auto it = lines_.find(key);
    return it == lines_.end() ? origin_ : origin_ + ":" + std::to_string(it->second);
  }

  double to_double(const std::string& key, const std::string& text) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::kParse, where(key) + ": expected a number, got '" + text + "'");
  }

  std::map<std::string, std::string> values_;
  std::map<std::string, std::size_t> lines_;
  mutable std::set<std::string> used_;
  std::string origin_ = "<config>";
};

}  // namespace monge::harness
