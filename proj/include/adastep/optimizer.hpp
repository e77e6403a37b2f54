// SGD loop x_{t+1} = x_t - eta_t g(x_t, xi_t) with trajectory recording,
// iterate selectors, and the quarantined biased-step experiment.

#ifndef ADASTEP_OPTIMIZER_HPP
#define ADASTEP_OPTIMIZER_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "adastep/noise.hpp"
#include "adastep/objective.hpp"
#include "adastep/rng.hpp"
#include "adastep/stepsize.hpp"
#include "adastep/vec.hpp"

namespace adastep {

struct RunConfig {
  ObjectivePtr objective;
  NoiseModel noise;
  StepsizeConfig stepsize;
  Vector x0;
  std::int64_t horizon = 1;
  std::uint64_t seed = 0;
  std::int64_t record_stride = 1;
  /// Extra capture points (sorted ascending) at which prefix statistics of
  /// the first t iterates are recorded; used to read several horizons off a
  /// single run.
  std::vector<std::int64_t> milestones;

  void validate() const;
};

struct CheckpointRow {
  std::int64_t t = 0;
  double f_gap = 0.0;
  double grad_norm_sq = 0.0;
  double eta_min = 0.0;  // eta_min == eta_max for scalar stepsizes
  double eta_max = 0.0;
  double liminf_stat = 0.0;
};

struct MilestoneRow {
  std::int64_t t = 0;
  double f_gap_average_iterate = 0.0;  // f(mean of x_1..x_t) - f*
  double min_grad_norm_sq = 0.0;       // min over s <= t of ||grad f(x_s)||^2
  double liminf_stat = 0.0;
};

enum class RunStatus { Ok, NumericalFailure };

struct Trajectory {
  RunStatus status = RunStatus::Ok;
  std::int64_t failed_at = 0;  // first step with a non-finite value; 0 when ok

  std::int64_t horizon = 0;  // steps actually completed
  int dim = 0;
  double f_star = 0.0;
  double epsilon_used = 0.0;
  bool bounded_noise = false;
  bool lipschitz_objective = false;
  ObjectivePtr objective;

  std::vector<CheckpointRow> checkpoints;
  std::vector<MilestoneRow> milestones;

  // Online aggregates, exact over every executed step (not just checkpoints).
  Vector sum_x;
  Vector last_x;
  std::int64_t last_t = 0;
  std::int64_t best_t = 0;  // argmin of true squared gradient norm; earliest wins
  double best_grad_norm_sq = 0.0;
  Vector best_x;
  double liminf_stat = 0.0;  // min over s <= t of ||grad f(x_s)||^2 s^(1/2-eps)
  double sum_eta_sq_g_sq = 0.0;    // sum_t ||eta_t (.) g_t||^2
  double sum_eta_dir_grad = 0.0;   // sum_t <grad f(x_t), eta_t (.) grad f(x_t)>
};

/// Per-step capture for tests (replay, delay semantics). eta holds the
/// stepsize(s) used at step t (one entry for scalar policies); eta_next the
/// value the policy reports after observing g_t.
struct StepRecord {
  std::int64_t t = 0;
  Vector eta;
  Vector g;
  Vector x_after;
  Vector eta_next;
};

using StepObserver = std::function<void(const StepRecord&)>;

/// Step-by-step SGD driver. One instance per run; owns all mutable state
/// except the random source, which the caller supplies per step.
class SgdEngine {
 public:
  explicit SgdEngine(const RunConfig& config);

  /// Executes one step. Returns false on a non-finite gradient or iterate,
  /// after marking the trajectory as failed.
  bool step(Rng& rng, const StepObserver& observer = {});

  std::int64_t t() const { return t_; }
  const Vector& x() const { return x_; }
  const StepsizeState& stepsize_state() const { return stepsize_; }

  Trajectory finish() &&;

 private:
  RunConfig config_;
  StepsizeState stepsize_;
  Trajectory traj_;
  Vector x_;
  std::int64_t t_ = 1;
  double exponent_ = 0.5;  // 1/2 - epsilon for the liminf statistic

  std::vector<std::int64_t> checkpoint_grid_;
  std::size_t checkpoint_idx_ = 0;
  std::size_t milestone_idx_ = 0;

  // step buffers, reused to keep the hot loop allocation-free
  Vector grad_buf_, noise_buf_, g_buf_, eta_buf_, avg_buf_;

  void fail(std::int64_t at);
};

/// Runs exactly config.horizon steps (fewer on numerical failure) with the
/// stream derived from config.seed. Identical config => bit-identical
/// trajectory within one build.
Trajectory run(const RunConfig& config, const StepObserver& observer = {});

enum class Selector { Last, Average, BestGradient };

struct Selection {
  Vector x;
  std::int64_t t = 0;
  double f_gap = 0.0;
  double grad_norm_sq = 0.0;
};

/// Extracts the requested iterate with its true metrics. Throws
/// NumericalError when the trajectory ended in a numerical failure.
Selection select(const Trajectory& traj, Selector which);

struct BiasedStepEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n = 0;
};

/// Monte Carlo mean of <eta_{t+1} g_t, grad f(x_t)> for f(x) = x^2/2 under
/// three-point noise of magnitude sigma_t, where the stepsize wrongly
/// includes the current gradient: eta_{t+1} = alpha/(a_acc + g_t^2)^(1/2+eps),
/// g_t = x_t + xi_t. This biased inner product can be negative; the delayed
/// policies never produce it (see analysis::unbiased_direction_check).
BiasedStepEstimate run_biased_step(double x_t, double sigma_t, double a_acc,
                                   double alpha, double epsilon, Rng& rng,
                                   std::int64_t n);

}  // namespace adastep

#endif  // ADASTEP_OPTIMIZER_HPP
