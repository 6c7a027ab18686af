#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "bqkz/harness.hpp"

using namespace bqkz;

namespace {

constexpr int kPass = 0, kFail = 1, kConfig = 2;

std::string suite_help() {
  std::string s = "suite to run (repeatable): ";
  for (std::size_t i = 0; i < harness::suite_names().size(); ++i) s += (i ? ", " : "") + harness::suite_names()[i];
  return s;
}

config::RunConfig load(const std::string& path) { return path.empty() ? config::RunConfig{} : config::load_config(path); }

int summarize(const harness::Report& r) {
  for (const auto& c : r.cases) {
    if (c.pass) continue;
    std::cout << "FAIL " << c.suite << " " << c.case_id << " residual=" << c.residual << " tol=" << c.tol;
    if (!c.error.empty()) std::cout << " error=\"" << c.error << "\"";
    std::cout << "\n";
  }
  std::cout << "passed " << r.passed() << "/" << r.total() << "\n";
  return r.passed() == r.total() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary qKZ verification toolkit"};
  app.require_subcommand(1);

  std::string cfg_path, out_path;
  std::vector<std::string> suites;
  std::uint64_t seed = 0;
  double tol = 0;
  bool deterministic = false;

  auto* verify = app.add_subcommand("verify", "run verification suites and print failing cases");
  verify->add_option("--config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
  verify->add_option("--suite", suites, suite_help());
  auto* seed_opt = verify->add_option("--seed", seed, "seed for sampled suites");
  auto* tol_opt = verify->add_option("--tol", tol, "relative tolerance")->check(CLI::PositiveNumber);
  verify->add_flag("--deterministic", deterministic, "serial execution and ordered reductions");
  verify->add_option("--out", out_path, "also write the JSON report here");

  auto* sweep = app.add_subcommand("sweep-qkz", "qKZ residuals against lattice truncation, as CSV");
  sweep->add_option("--config", cfg_path, "config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_path, "CSV output path")->required();

  auto* report = app.add_subcommand("report", "run the configured suites and write a JSON report");
  report->add_option("--out", out_path, "JSON output path")->required();
  report->add_option("--config", cfg_path, "config file (defaults apply when omitted)")->check(CLI::ExistingFile);
  report->add_option("--suite", suites, suite_help());
  auto* rseed_opt = report->add_option("--seed", seed, "seed for sampled suites");

  CLI11_PARSE(app, argc, argv);

  try {
    config::RunConfig cfg = load(cfg_path);
    if (!suites.empty()) cfg.suites = suites;
    if (*seed_opt || *rseed_opt) cfg.seed = seed;

    if (*verify) {
      if (*tol_opt) cfg.rel_tol = tol;
      if (deterministic) cfg.deterministic = true;
      if (cfg.suites.empty()) cfg.suites = harness::suite_names();
      const auto rep = harness::run_suite(cfg);
      if (!out_path.empty()) harness::emit_report(rep, out_path);
      return summarize(rep);
    }
    if (*sweep) {
      const auto sw = harness::sweep_qkz(cfg);
      std::ofstream f(out_path);
      if (!f) {
        std::cerr << "cannot write '" << out_path << "'\n";
        return kFail;
      }
      harness::write_sweep_csv(sw, f);
      if (!sw.in_domain) std::cerr << "warning: parameters outside the convergence domain (margin " << sw.margin << ")\n";
      return kPass;
    }
    const auto rep = harness::run_suite(cfg);
    harness::emit_report(rep, out_path);
    return summarize(rep);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
}
