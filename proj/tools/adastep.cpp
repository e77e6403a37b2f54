// adastep: SGD with generalized AdaGrad stepsizes at the command line.
//
// Subcommands: run (single trajectory), sweep (sigma x seed grid with rate
// fits and bound reports), lemmas (inequality audit), example1 (biased-step
// expectation), rates (re-fit from an existing metrics.csv).
//
// Exit codes: 0 ok, 1 config error, 2 numerical failure, 3 lemma violation.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "adastep/analysis.hpp"
#include "adastep/config.hpp"
#include "adastep/errors.hpp"
#include "adastep/sweep.hpp"

namespace {

using namespace adastep;

namespace fs = std::filesystem;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

fs::path prepare_output_dir(const ExperimentConfig& config) {
  fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output_dir '" + config.output_dir + "'");
  return dir;
}

int cmd_run(const std::string& config_path) {
  auto start = std::chrono::steady_clock::now();
  ExperimentConfig config = load_config(config_path);
  if (!config.run) throw ConfigError("config: 'run' section is missing");
  Trajectory traj = run_single(config);
  fs::path dir = prepare_output_dir(config);
  write_trajectory_csv(traj, (dir / "trajectory.csv").string());
  write_run_summary_json(traj, (dir / "summary.json").string());
  write_run_manifest(config, traj, seconds_since(start), (dir / "manifest.json").string());
  if (traj.status != RunStatus::Ok) {
    std::cerr << "numerical failure: non-finite value at t=" << traj.failed_at
              << " (see " << (dir / "summary.json").string() << ")\n";
    return 2;
  }
  std::cout << "ok: " << traj.horizon << " steps, "
            << traj.checkpoints.size() << " checkpoint rows -> "
            << (dir / "trajectory.csv").string() << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path) {
  auto start = std::chrono::steady_clock::now();
  ExperimentConfig config = load_config(config_path);
  if (!config.sweep) throw ConfigError("config: 'sweep' section is missing");
  int workers = resolve_workers(config);
  SweepResult result = run_sweep(config, workers);
  fs::path dir = prepare_output_dir(config);
  write_metrics_csv(result, (dir / "metrics.csv").string());
  write_rates_csv(result.rates, (dir / "rates.csv").string());
  write_bounds_json(result, (dir / "bounds.json").string());
  write_sweep_manifest(config, result, seconds_since(start),
                       (dir / "manifest.json").string());
  std::size_t n_cells = result.cells.size();
  std::cout << "sweep: " << n_cells - result.n_failed << "/" << n_cells
            << " cells ok -> " << (dir / "rates.csv").string() << "\n";
  for (const auto& r : result.rates) {
    std::cout << "  sigma=" << r.sigma << " " << r.metric << " slope=" << r.slope
              << " r2=" << r.r_squared << " (n=" << r.n_seeds << ")\n";
  }
  // Tolerate isolated cell failures but not a broken grid.
  if (result.n_failed * 10 > static_cast<int>(n_cells)) return 2;
  return 0;
}

int cmd_lemmas(std::uint64_t seed, int n, const std::string& out_dir,
               bool zero_rhs_hook) {
  if (n < 1) throw ConfigError("lemmas: -n must be >= 1");
  LemmaReport report = lemma_checks(seed, n, zero_rhs_hook);
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output dir '" + out_dir + "'");
  write_lemma_report(report, (dir / "lemma_report.txt").string(),
                     (dir / "lemma_report.json").string());
  for (const auto& c : report.checks) {
    std::cout << c.name << ": " << c.instances << " instances, " << c.violations
              << " violations\n";
    if (!c.counterexample.empty()) {
      std::cout << "  counterexample: " << c.counterexample << "\n";
    }
  }
  if (!report.all_passed()) {
    std::cerr << "lemma violation found\n";
    return 3;
  }
  return 0;
}

int cmd_example1(double x, double sigma, double a_acc, double alpha,
                 double epsilon, std::int64_t n, std::uint64_t seed) {
  double exact = example1_exact(x, sigma, a_acc, alpha, epsilon);
  Rng rng(seed, 0);
  BiasedStepEstimate mc = run_biased_step(x, sigma, a_acc, alpha, epsilon, rng, n);
  double unbiased = unbiased_direction_check(x, sigma, a_acc, alpha, epsilon);
  std::printf("biased inner product, exact:       % .10g\n", exact);
  std::printf("biased inner product, monte carlo: % .10g +- %.3g (n=%lld)\n",
              mc.mean, mc.std_error, static_cast<long long>(mc.n));
  std::printf("delayed-stepsize inner product:    % .10g\n", unbiased);
  return 0;
}

int cmd_rates(const std::string& metrics_path, const std::string& out_path) {
  std::vector<SigmaRate> rates = refit_rates_from_metrics_csv(metrics_path);
  write_rates_csv(rates, out_path);
  for (const auto& r : rates) {
    std::cout << "sigma=" << r.sigma << " " << r.metric << " slope=" << r.slope
              << " r2=" << r.r_squared << " (n=" << r.n_seeds << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SGD with generalized AdaGrad stepsizes: runs, sweeps, "
               "inequality audits"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Execute a single run from a config file");
  run_cmd->add_option("config", config_path, "JSON config path")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "Execute a (sigma x seed) sweep");
  sweep_cmd->add_option("config", config_path, "JSON config path")->required();

  std::uint64_t lemma_seed = 1;
  int lemma_n = 10000;
  std::string lemma_out = ".";
  bool zero_rhs_hook = false;
  auto* lemmas_cmd = app.add_subcommand("lemmas", "Audit the inequality suite");
  lemmas_cmd->add_option("--seed", lemma_seed, "RNG seed");
  lemmas_cmd->add_option("-n,--instances", lemma_n, "Instances per inequality");
  lemmas_cmd->add_option("--out", lemma_out, "Report directory");
  lemmas_cmd->add_flag("--zero-rhs-hook", zero_rhs_hook,
                       "Testing hook: corrupt one bound to exercise the "
                       "violation path")
      ->group("");

  double e1_x = 1.0, e1_sigma = 10.0, e1_a = 10.0, e1_alpha = 1.0, e1_eps = 0.0;
  std::int64_t e1_n = 1000000;
  std::uint64_t e1_seed = 1;
  auto* ex1_cmd = app.add_subcommand(
      "example1", "Exact vs Monte Carlo biased-step inner product");
  ex1_cmd->add_option("--x", e1_x, "Iterate x_t");
  ex1_cmd->add_option("--sigma", e1_sigma, "Three-point noise magnitude");
  ex1_cmd->add_option("--A", e1_a, "Accumulator value beta + sum of g_i^2");
  ex1_cmd->add_option("--alpha", e1_alpha, "Stepsize numerator");
  ex1_cmd->add_option("--epsilon", e1_eps, "Stepsize exponent offset");
  ex1_cmd->add_option("-n", e1_n, "Monte Carlo draws");
  ex1_cmd->add_option("--seed", e1_seed, "RNG seed");

  std::string metrics_path, rates_out = "rates.csv";
  auto* rates_cmd =
      app.add_subcommand("rates", "Re-fit rate table from an existing metrics.csv");
  rates_cmd->add_option("metrics", metrics_path, "metrics.csv path")->required();
  rates_cmd->add_option("--out", rates_out, "Output rates.csv path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(config_path);
    if (sweep_cmd->parsed()) return cmd_sweep(config_path);
    if (lemmas_cmd->parsed())
      return cmd_lemmas(lemma_seed, lemma_n, lemma_out, zero_rhs_hook);
    if (ex1_cmd->parsed()) {
      if (!(e1_a > 0.0)) throw ConfigError("example1: --A must be > 0");
      if (!(e1_alpha > 0.0)) throw ConfigError("example1: --alpha must be > 0");
      if (!(e1_sigma >= 0.0)) throw ConfigError("example1: --sigma must be >= 0");
      if (e1_n < 1) throw ConfigError("example1: -n must be >= 1");
      return cmd_example1(e1_x, e1_sigma, e1_a, e1_alpha, e1_eps, e1_n, e1_seed);
    }
    if (rates_cmd->parsed()) return cmd_rates(metrics_path, rates_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
