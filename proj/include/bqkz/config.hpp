#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bqkz/spaces.hpp"

namespace bqkz::config {

// Parsed value of the flat TOML subset: strings, numbers, booleans and (nested) arrays.
struct Value {
  using Array = std::vector<Value>;
  std::variant<std::string, double, bool, Array> v;

  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_number() const { return std::holds_alternative<double>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_array() const { return std::holds_alternative<Array>(v); }
};

// section -> key -> value; keys before any header live in section "".
using Document = std::map<std::string, std::map<std::string, Value>>;

// ConfigError carries the line number on malformed input.
Document parse_toml(const std::string& text);

struct RunConfig {
  SpectralParams params;
  std::vector<spaces::SpinLabel> spins{spaces::SpinLabel::Finite(0.5), spaces::SpinLabel::Finite(1.0)};
  std::vector<cd> t{{0.1, 0.2}, {-0.35, 0.05}};

  int S = 1;
  std::vector<cd> x0{{0.23, 0.17}};
  std::vector<int> n_cuts{4, 8, 12};
  int level_cutoff = 3;

  std::vector<std::string> suites;
  double rel_tol = 1e-9;
  double qkz_tol = 1e-6;
  std::optional<std::uint64_t> seed;
  int samples = 20;
  int threads = 0;
  bool deterministic = false;

  ToleranceProfile prof;

  // ConfigError naming the offending field.
  void validate() const;
};

// "1/2", "1", "3/2", ... or "generic:<re>+<im>i"; ConfigError mentions `field`.
spaces::SpinLabel parse_spin(const std::string& s, const std::string& field);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical text of the params and chain sections (fixed key order, round-trip precision).
std::string canonical_params(const RunConfig& cfg);

}  // namespace bqkz::config
