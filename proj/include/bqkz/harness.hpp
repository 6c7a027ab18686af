#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "bqkz/config.hpp"

namespace bqkz::harness {

using config::RunConfig;

struct CaseRecord {
  std::string suite;
  std::string case_id;
  std::string params_digest;
  double residual = 0;  // +inf when the case raised
  double tol = 0;
  bool pass = false;
  long long runtime_ms = 0;
  std::string error;  // empty unless the case raised
};

struct Report {
  nlohmann::ordered_json config;
  std::vector<CaseRecord> cases;

  int total() const { return int(cases.size()); }
  int passed() const;
};

// Names accepted in verify.suites, in execution order.
const std::vector<std::string>& suite_names();

// 16 hex digits of a 64-bit FNV-1a hash of the canonical params and chain sections.
std::string params_digest(const RunConfig& cfg);

// Echo of the run configuration with a fixed key order.
nlohmann::ordered_json config_json(const RunConfig& cfg);

// Runs cfg.suites. ConfigError for unknown suite names or a missing seed.
Report run_suite(const RunConfig& cfg);

nlohmann::ordered_json to_json(const Report& r);
// Reverse of to_json (used to check round trips).
Report from_json(const nlohmann::ordered_json& j);
void emit_report(const Report& r, const std::string& path);

struct SweepRow {
  int n_cut = 0;
  double tail_estimate = 0;
  std::vector<double> residuals;  // one per site
};

struct Sweep {
  std::vector<SweepRow> rows;
  int sites = 0;
  bool in_domain = true;
  double margin = 0;
};

// qKZ residuals of the truncated solution for every n_cut of the config.
Sweep sweep_qkz(const RunConfig& cfg);

// Header n_cut,tail_estimate,residual_r1,...; out-of-domain runs start with a '#' warning line.
void write_sweep_csv(const Sweep& s, std::ostream& os);

}  // namespace bqkz::harness
