#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "cutoff/distance.hpp"
#include "cutoff/errors.hpp"
#include "cutoff/lab/config.hpp"
#include "cutoff/lab/experiments.hpp"
#include "cutoff/lab/expr.hpp"
#include "cutoff/lab/report.hpp"

namespace {

int run(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed,
        std::optional<int> threads, bool force) {
  auto cfg = cutoff::lab::load_config(config);
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  if (force) cfg.force_audits = true;
  const auto report = cutoff::lab::run_all(cfg);
  cutoff::lab::write_report(report, out);
  for (const auto& [name, ok] : report.flags) std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
  for (const auto& name : report.censored) std::cout << "CENSORED " << name << "\n";
  if (!report.error.empty()) std::cerr << "error: " << report.error << "\n";
  return report.exit_code();
}

int audit(const std::string& config) {
  const auto cfg = cutoff::lab::load_config(config);
  const auto a = cutoff::lab::hypothesis_audit(cfg);
  std::cout << a.detail.dump(2) << "\n";
  return a.pass ? 0 : 1;
}

int slutsky(long n, const std::string& an) {
  const double a = cutoff::lab::eval_in_n(an, static_cast<double>(n));
  const auto s = cutoff::slutsky_demo(n, a);
  const nlohmann::json j = {{"n", s.n},
                            {"a_n", s.a_n},
                            {"tv_Xn_vs_U", s.tv_Xn_vs_U},
                            {"tv_XnYn_vs_U", s.tv_XnYn_vs_U},
                            {"n_times_an", s.n_times_an},
                            {"regime", s.regime},
                            {"note", s.note}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cutoff experiments for small-noise Levy-driven gradient systems"};
  app.require_subcommand(1);

  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool force = false;
  auto* run_cmd = app.add_subcommand("run", "Run every configured experiment and write the report");
  run_cmd->add_option("--config", config, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out, "Output directory")->required();
  run_cmd->add_option("--seed", seed, "Override the master seed");
  run_cmd->add_option("--threads", threads, "Worker threads (0 = all)");
  run_cmd->add_flag("--force-audits", force, "Continue when hypothesis audits fail");

  std::string audit_config;
  auto* audit_cmd = app.add_subcommand("audit", "Run the hypothesis audits only");
  audit_cmd->add_option("--config", audit_config, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);

  long n = 0;
  std::string an;
  auto* sl_cmd = app.add_subcommand("slutsky", "Exact Slutsky counterexample computation");
  sl_cmd->add_option("--n", n, "Lattice size")->required()->check(CLI::PositiveNumber);
  sl_cmd->add_option("--an", an, "Perturbation size as an expression in n, e.g. n^-0.5")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return run(config, out, seed, threads, force);
    if (*audit_cmd) return audit(audit_config);
    if (*sl_cmd) return slutsky(n, an);
  } catch (const cutoff::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
