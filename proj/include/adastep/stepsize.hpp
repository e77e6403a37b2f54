// Stepsize policies: generalized AdaGrad (global and coordinate-wise) with
// strict delayed semantics, the deliberately biased global variant, and
// classical polynomial schedules.
//
// The API is split into a read (current_stepsize*) and a write (observe) so
// that the stepsize used at step t structurally cannot depend on the step-t
// gradient. The biased variant reuses the same state type; only the
// optimizer's dedicated biased path observes before reading.

#ifndef ADASTEP_STEPSIZE_HPP
#define ADASTEP_STEPSIZE_HPP

#include <cstdint>
#include <string>

#include "adastep/vec.hpp"

namespace adastep {

enum class StepsizeVariant {
  GlobalAdaGrad,        // eta_t = alpha / (beta + sum_{i<t} ||g_i||^2)^(1/2+eps)
  CoordAdaGrad,         // per-coordinate accumulator of g_{i,j}^2
  BiasedGlobalAdaGrad,  // negative control: accumulator includes g_t
  PolySchedule,         // eta_t = scale / t^power; ignores gradients
};

std::string to_string(StepsizeVariant variant);

struct StepsizeConfig {
  StepsizeVariant variant = StepsizeVariant::GlobalAdaGrad;
  double alpha = 1.0;
  double beta = 1.0;
  double epsilon = 0.0;  // in [0, 1/2]
  double poly_power = 0.0;
  double poly_scale = 1.0;

  static StepsizeConfig global_adagrad(double alpha, double beta, double epsilon);
  static StepsizeConfig coord_adagrad(double alpha, double beta, double epsilon);
  static StepsizeConfig biased_global_adagrad(double alpha, double beta, double epsilon);
  static StepsizeConfig poly(double power, double scale);

  bool is_adagrad() const { return variant != StepsizeVariant::PolySchedule; }
  bool is_coordinate_wise() const { return variant == StepsizeVariant::CoordAdaGrad; }

  void validate() const;
};

/// Running state of a stepsize policy. Single-owner mutable: one instance
/// per run, never shared across concurrent runs.
class StepsizeState {
 public:
  StepsizeState(const StepsizeConfig& config, int dim);

  const StepsizeConfig& config() const { return config_; }
  std::int64_t t() const { return t_; }

  /// Stepsize for the upcoming step (scalar variants). For the unbiased
  /// AdaGrad variants this never depends on a gradient not yet observed.
  double current_stepsize() const;

  /// Coordinate-wise stepsizes for the upcoming step (CoordAdaGrad only).
  void current_stepsizes(Vector& out) const;

  double accumulator() const;                 // global variants
  const Vector& coordinate_accumulator() const;  // CoordAdaGrad

  /// Feed the gradient observed at the current step; advances t by one.
  /// Poly schedules advance t and ignore g.
  void observe(const Vector& g);

 private:
  StepsizeConfig config_;
  double acc_ = 0.0;
  Vector acc_coord_;
  std::int64_t t_ = 1;

  double power_of(double base) const;
};

/// Partial sums of a stepsize sequence against the classical divergence /
/// square-summability conditions. Diagnostic only: a finite prefix cannot
/// certify either condition, so no pass/fail verdict is attached.
struct ScheduleDiagnostic {
  std::int64_t horizon = 0;
  double sum_eta = 0.0;
  double sum_eta_sq = 0.0;
  double sum_eta_at_half = 0.0;     // prefix sums at T/2 for growth shape
  double sum_eta_sq_at_half = 0.0;
  std::string sum_eta_growth;       // "bounded-like" | "log-like" | "polynomial-like"
  std::string sum_eta_sq_growth;
};

ScheduleDiagnostic robbins_monro_diagnostic(const StepsizeConfig& poly_config,
                                            std::int64_t horizon);
ScheduleDiagnostic robbins_monro_diagnostic(const std::vector<double>& stepsizes);

}  // namespace adastep

#endif  // ADASTEP_STEPSIZE_HPP
