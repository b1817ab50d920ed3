#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "gwcls/error.hpp"
#include "gwcls/law.hpp"
#include "gwcls/model.hpp"

namespace gwcls {

/// Flat `key = value` configuration.
///
/// One entry per line; `#` starts a comment; blank lines are ignored. Laws
/// are written as `;`-separated `x1 x2 prob` triples, lists as
/// whitespace-separated values. Unknown keys are rejected.
///
///   model       general | unit_total | equal_pair | equal_pair_null | custom
///   alpha       builder parameter (general: 0.3, unit_total: 0.6)
///   offspring1  law of a type 1 parent's offspring (custom models)
///   offspring2  law of a type 2 parent's offspring (custom models)
///   immigration immigration law; overrides the builder's default
///   n, replicas, seed, threads, stream
///   n_values, limit_paths, sde_steps, ks_tolerance, variance_tolerance,
///   monotone_slack                              (experiment)
///   paths, steps                                (limit)
///   targets (e.g. "U:2 V:1 M:2"), ks, band      (verify-moments)
///   input                                       (estimate: trajectory CSV)
class KeyValueConfig {
 public:
  static const std::set<std::string, std::less<>>& known_keys() {
    static const std::set<std::string, std::less<>> keys{
        "model",      "alpha",        "offspring1",   "offspring2",         "immigration",
        "n",          "replicas",     "seed",         "threads",            "stream",
        "n_values",   "limit_paths",  "sde_steps",    "ks_tolerance",       "variance_tolerance",
        "monotone_slack", "paths",    "steps",        "targets",            "ks",
        "band",       "input"};
    return keys;
  }

  static KeyValueConfig parse(std::string_view text) {
    KeyValueConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const std::string body = trim(line);
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos)
        throw Error(ErrorCode::ConfigError,
                    "line " + std::to_string(line_no) + ": expected 'key = value'");
      cfg.set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  void set(const std::string& key, const std::string& value) {
    if (!known_keys().contains(key)) throw Error(ErrorCode::ConfigError, "unknown key '" + key + "'");
    values_[key] = value;
  }

  bool has(std::string_view key) const { return values_.find(key) != values_.end(); }

  std::string get_string(std::string_view key, std::string fallback = {}) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(std::string_view key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return to_number<double>(key, it->second);
  }

  std::uint64_t get_uint(std::string_view key, std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return to_number<std::uint64_t>(key, it->second);
  }

  std::vector<std::uint64_t> get_uint_list(std::string_view key,
                                           std::vector<std::uint64_t> fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::uint64_t> out;
    std::istringstream in(it->second);
    std::string tok;
    while (in >> tok) out.push_back(to_number<std::uint64_t>(key, tok));
    return out;
  }

  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
  }

 private:
  template <class T>
  static T to_number(std::string_view key, const std::string& text) {
    std::istringstream in(text);
    T v{};
    if constexpr (std::is_unsigned_v<T>) {
      if (text.find('-') != std::string::npos)
        throw Error(ErrorCode::ConfigError, "key '" + std::string(key) + "' must be non-negative");
    }
    if (!(in >> v) || !(in >> std::ws).eof())
      throw Error(ErrorCode::ConfigError,
                  "key '" + std::string(key) + "': cannot parse '" + text + "'");
    return v;
  }

  std::map<std::string, std::string, std::less<>> values_;
};

/// Parses "x1 x2 p; x1 x2 p; ...".
inline FiniteLaw2D parse_law(std::string_view text) {
  std::vector<Atom> atoms;
  std::string chunk;
  std::istringstream all{std::string(text)};
  while (std::getline(all, chunk, ';')) {
    if (KeyValueConfig::trim(chunk).empty()) continue;
    std::istringstream in(chunk);
    long long x1 = 0, x2 = 0;
    double p = 0.0;
    if (!(in >> x1 >> x2 >> p) || !(in >> std::ws).eof())
      throw Error(ErrorCode::ConfigError, "bad atom '" + KeyValueConfig::trim(chunk) +
                                              "': expected 'x1 x2 prob'");
    atoms.push_back({{x1, x2}, p});
  }
  return FiniteLaw2D(std::move(atoms));
}

inline std::string format_law(const FiniteLaw2D& law) {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& a : law.atoms()) {
    if (!first) os << "; ";
    os << a.point.first << ' ' << a.point.second << ' ' << a.probability;
    first = false;
  }
  return os.str();
}

/// Builds the model named by `model` (default "general").
inline ModelSpec model_from_config(const KeyValueConfig& cfg) {
  const std::string name = cfg.get_string("model", "general");
  std::optional<FiniteLaw2D> imm;
  if (cfg.has("immigration")) imm = parse_law(cfg.get_string("immigration"));
  if (name == "general" || name == "A") return model_general(cfg.get_double("alpha", 0.3), imm);
  if (name == "unit_total" || name == "B") return model_unit_total(cfg.get_double("alpha", 0.6), imm);
  if (name == "equal_pair" || name == "C") return model_equal_pair(imm);
  if (name == "equal_pair_null") {
    if (imm) throw Error(ErrorCode::ConfigError, "equal_pair_null fixes its immigration law");
    return model_equal_pair_null_immigration();
  }
  if (name == "custom") {
    if (!cfg.has("offspring1") || !cfg.has("offspring2") || !imm)
      throw Error(ErrorCode::ConfigError,
                  "custom model needs offspring1, offspring2 and immigration");
    return build_model(parse_law(cfg.get_string("offspring1")),
                       parse_law(cfg.get_string("offspring2")), std::move(*imm), "custom");
  }
  throw Error(ErrorCode::ConfigError, "unknown model '" + name + "'");
}

}  // namespace gwcls
