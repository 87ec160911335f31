// Benchmark harness: loads a problem config, runs the truncated-Newton
// envelope solver and/or the forward-backward splitting baseline, writes CSV
// traces and a text report, and exposes the library's property-check suites.
//
// Exit codes: 0 every requested run converged, 2 some run hit its iteration
// cap, 1 configuration or I/O error, 3 property-check failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "fbtn/config.hpp"
#include "fbtn/fbe.hpp"
#include "fbtn/report.hpp"
#include "fbtn/selfcheck.hpp"
#include "fbtn/solver.hpp"

namespace {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("FBTN_LOG");
  if (!env) return LogLevel::Info;
  std::string v(env);
  if (v == "quiet") return LogLevel::Quiet;
  if (v == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::cerr << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) std::cerr << msg << "\n";
}

struct Overrides {
  std::optional<double> eps, gamma, sigma_frac, zeta, rho, nu, eta_bar,
      lip_init, relax;
  std::optional<int> max_outer, max_backtracks, cg_max_iters;
  std::optional<std::uint64_t> seed;
};

fbtn::ProblemBundle load_bundle(const std::string& config_path,
                                const Overrides& ov) {
  std::string text = fbtn::read_text_file(config_path);
  if (ov.seed) {
    // Re-seeding regenerates the instance, so it has to happen before the
    // config is turned into oracles.
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("problem") || !j["problem"].is_object())
      throw fbtn::ConfigError("config: missing 'problem' section");
    j["problem"]["seed"] = *ov.seed;
    text = j.dump();
  }
  fbtn::ProblemBundle bundle = fbtn::load_config_text(text);

  if (ov.eps) bundle.options.eps = *ov.eps;
  if (ov.gamma) bundle.gamma_override = *ov.gamma;
  if (ov.sigma_frac) bundle.options.sigma_frac = *ov.sigma_frac;
  if (ov.zeta) bundle.options.zeta = *ov.zeta;
  if (ov.rho) bundle.options.rho = *ov.rho;
  if (ov.nu) bundle.options.nu = *ov.nu;
  if (ov.eta_bar) bundle.options.eta_bar = *ov.eta_bar;
  if (ov.lip_init) bundle.options.lip_init = *ov.lip_init;
  if (ov.max_outer) bundle.options.max_outer = *ov.max_outer;
  if (ov.max_backtracks) bundle.options.max_backtracks = *ov.max_backtracks;
  if (ov.cg_max_iters) bundle.options.cg_max_iters = *ov.cg_max_iters;
  if (ov.relax) bundle.fbs_relax = *ov.relax;
  try {
    bundle.options.validate();
  } catch (const std::invalid_argument& e) {
    throw fbtn::ConfigError(std::string("solver override: ") + e.what());
  }
  return bundle;
}

struct RunOutput {
  fbtn::Solution solution;
  fbtn::OracleCounters counters;
};

RunOutput run_solver(const fbtn::ProblemBundle& bundle, bool newton) {
  fbtn::FbeProblem problem(bundle.smooth, bundle.nonsmooth,
                           bundle.options.lip_init, bundle.gamma_override);
  fbtn::Solution sol =
      newton ? fbtn::fbtn_solve(problem, bundle.x0, bundle.options)
             : fbtn::fbs_solve(problem, bundle.x0, bundle.fbs_relax,
                               bundle.options.eps, bundle.options.max_outer);
  if (log_level() >= LogLevel::Debug)
    for (const auto& rec : sol.trace)
      log_debug("  k=" + std::to_string(rec.k) +
                " fbe=" + std::to_string(rec.fbe) +
                " res=" + std::to_string(rec.res_norm) +
                " tau=" + std::to_string(rec.tau) +
                " cg=" + std::to_string(rec.cg_iters));
  log_info(std::string(newton ? "fbtn" : "fbs") + ": " +
           fbtn::status_name(sol.status) + " after " +
           std::to_string(sol.trace.size()) + " iterations, final res " +
           std::to_string(sol.final_point.residual.norm()));
  return {std::move(sol), problem.counters()};
}

int run_command(const std::string& config_path, const std::string& solver,
                const std::string& out_dir, const Overrides& ov) {
  fbtn::ProblemBundle bundle = load_bundle(config_path, ov);
  log_info("instance: " + bundle.summary);

  std::filesystem::create_directories(out_dir);
  const bool want_newton = solver == "fbtn" || solver == "both";
  const bool want_splitting = solver == "fbs" || solver == "both";

  std::optional<RunOutput> newton, splitting;
  if (want_newton) newton = run_solver(bundle, true);
  if (want_splitting) splitting = run_solver(bundle, false);

  std::string report;
  report += "instance: " + bundle.summary + "\n\n";
  if (newton) {
    fbtn::write_text_file(out_dir + "/trace.csv",
                          fbtn::trace_to_csv(newton->solution.trace));
    report += fbtn::format_run_section("fbtn", newton->solution,
                                       newton->counters);
    report += fbtn::format_ratio_table("fbtn", newton->solution);
    report += "\n";
  }
  if (splitting) {
    const char* name = newton ? "/trace_fbs.csv" : "/trace.csv";
    fbtn::write_text_file(out_dir + name,
                          fbtn::trace_to_csv(splitting->solution.trace));
    report += fbtn::format_run_section("fbs", splitting->solution,
                                       splitting->counters);
    report += fbtn::format_ratio_table("fbs", splitting->solution);
    report += "\n";
  }
  if (newton && splitting)
    report += fbtn::format_comparison(newton->solution, splitting->solution);
  fbtn::write_text_file(out_dir + "/report.txt", report);
  log_info("wrote " + out_dir + "/report.txt");

  bool all_converged = true;
  if (newton)
    all_converged &= newton->solution.status ==
                     fbtn::SolveStatus::ResidualBelowTol;
  if (splitting)
    all_converged &= splitting->solution.status ==
                     fbtn::SolveStatus::ResidualBelowTol;
  return all_converged ? 0 : 2;
}

int check_command(std::uint64_t seed) {
  auto results = fbtn::selfcheck::run_all(seed);
  int failures = 0;
  for (const auto& r : results) {
    if (r.passed) {
      std::cout << "[PASS] " << r.name << "\n";
    } else {
      ++failures;
      std::cout << "[FAIL] " << r.name;
      if (!r.detail.empty()) std::cout << " -- " << r.detail;
      std::cout << "\n";
    }
  }
  std::cout << results.size() << " properties, " << failures << " failure(s)"
            << ", seed " << seed << "\n";
  return failures == 0 ? 0 : 3;
}

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--eps", ov.eps, "Stopping tolerance on the residual norm");
  cmd->add_option("--gamma", ov.gamma, "Fixed proximal stepsize");
  cmd->add_option("--sigma-frac", ov.sigma_frac,
                  "Fraction of the admissible descent coefficient");
  cmd->add_option("--zeta", ov.zeta, "Hessian regularization scale");
  cmd->add_option("--rho", ov.rho, "Inner-tolerance forcing exponent");
  cmd->add_option("--nu", ov.nu, "Regularization exponent");
  cmd->add_option("--eta-bar", ov.eta_bar, "Cap on the inner forcing ratio");
  cmd->add_option("--lip-init", ov.lip_init,
                  "Initial curvature guess when the smooth term has none");
  cmd->add_option("--max-outer", ov.max_outer, "Outer iteration cap");
  cmd->add_option("--max-backtracks", ov.max_backtracks,
                  "Linesearch halving cap");
  cmd->add_option("--cg-max-iters", ov.cg_max_iters,
                  "Inner solve iteration cap (0: twice the dimension)");
  cmd->add_option("--relax", ov.relax,
                  "Relaxation factor for the splitting baseline");
  cmd->add_option("--seed", ov.seed, "Replaces the instance generator seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Composite-minimization benchmark harness: a truncated-Newton method "
      "on the forward-backward envelope versus plain splitting"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", solver = "fbtn";
  Overrides ov;
  std::uint64_t check_seed = 1;

  CLI::App* solve = app.add_subcommand("solve", "Run one solver on a config");
  solve->add_option("--config", config_path, "Problem config (JSON)")
      ->required();
  solve->add_option("--solver", solver, "fbtn, fbs, or both")
      ->check(CLI::IsMember({"fbtn", "fbs", "both"}));
  solve->add_option("--out", out_dir, "Output directory");
  add_override_flags(solve, ov);

  CLI::App* compare = app.add_subcommand(
      "compare", "Run both solvers on the same instance and tolerance");
  compare->add_option("--config", config_path, "Problem config (JSON)")
      ->required();
  compare->add_option("--out", out_dir, "Output directory");
  add_override_flags(compare, ov);

  CLI::App* check =
      app.add_subcommand("check", "Run the library's property-check suites");
  check->add_option("--seed", check_seed, "Seed for all randomized checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_command(config_path, solver, out_dir, ov);
    if (compare->parsed()) return run_command(config_path, "both", out_dir, ov);
    if (check->parsed()) return check_command(check_seed);
  } catch (const fbtn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
