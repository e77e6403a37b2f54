// Experiment orchestration: single runs to CSV, and (sigma x seed) sweeps
// with per-sigma rate fits and theorem-bound reports.
//
// Cells are distributed over a worker pool; results are merged in a fixed
// order (sigma index, then seed value) and per-sigma reductions sort by seed
// before summing, so the output bytes never depend on scheduling or on the
// order seeds were listed in the config.

#ifndef ADASTEP_SWEEP_HPP
#define ADASTEP_SWEEP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "adastep/analysis.hpp"
#include "adastep/config.hpp"
#include "adastep/optimizer.hpp"

namespace adastep {

struct CellResult {
  double sigma = 0.0;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::Ok;
  std::int64_t failed_at = 0;
  double last_finite_f_gap = 0.0;       // post-mortem payload for failures
  double last_finite_grad_norm_sq = 0.0;
  std::vector<MilestoneRow> milestones;  // one per reached horizon
};

struct SigmaRate {
  double sigma = 0.0;
  std::string metric;
  double slope = 0.0;
  double r_squared = 0.0;
  int n_seeds = 0;
  bool ok = false;  // false when the fit was impossible (e.g. zero metric)
};

struct SigmaBound {
  double sigma = 0.0;
  bool applicable = false;
  std::string theorem;  // "convex" | "nonconvex"
  std::string note;
  int n_seeds = 0;
  double lhs_mean = 0.0;
  double lhs_std_error = 0.0;
  BoundEvaluation bound;
  TheoremParams params;
  bool satisfied = false;
};

struct SweepResult {
  std::vector<double> sigmas;
  std::vector<std::uint64_t> seeds;  // ascending
  std::vector<std::int64_t> horizons;
  SweepMetric metric = SweepMetric::FGapAverage;
  std::vector<CellResult> cells;  // sigma-major, seed-ascending
  std::vector<SigmaRate> rates;
  std::vector<SigmaBound> bounds;
  int n_failed = 0;
};

/// Runs every (sigma, seed) cell of config.sweep, possibly concurrently.
SweepResult run_sweep(const ExperimentConfig& config, int workers);

/// Runs config.run as a single trajectory.
Trajectory run_single(const ExperimentConfig& config);

// --- file emission (floats printed with 17 significant digits) ---

void write_trajectory_csv(const Trajectory& traj, const std::string& path);
void write_run_summary_json(const Trajectory& traj, const std::string& path);
void write_run_manifest(const ExperimentConfig& config, const Trajectory& traj,
                        double wall_seconds, const std::string& path);

void write_metrics_csv(const SweepResult& result, const std::string& path);
void write_rates_csv(const std::vector<SigmaRate>& rates, const std::string& path);
void write_bounds_json(const SweepResult& result, const std::string& path);
void write_sweep_manifest(const ExperimentConfig& config, const SweepResult& result,
                          double wall_seconds, const std::string& path);

/// Re-fit per-sigma rates from a previously written metrics.csv.
std::vector<SigmaRate> refit_rates_from_metrics_csv(const std::string& path);

void write_lemma_report(const LemmaReport& report, const std::string& text_path,
                        const std::string& json_path);

}  // namespace adastep

#endif  // ADASTEP_SWEEP_HPP
