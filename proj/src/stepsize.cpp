#include "adastep/stepsize.hpp"

#include <cmath>

#include "adastep/errors.hpp"

namespace adastep {

std::string to_string(StepsizeVariant variant) {
  switch (variant) {
    case StepsizeVariant::GlobalAdaGrad: return "global_adagrad";
    case StepsizeVariant::CoordAdaGrad: return "coord_adagrad";
    case StepsizeVariant::BiasedGlobalAdaGrad: return "biased_global_adagrad";
    case StepsizeVariant::PolySchedule: return "poly";
  }
  return "unknown";
}

StepsizeConfig StepsizeConfig::global_adagrad(double alpha, double beta,
                                              double epsilon) {
  StepsizeConfig c;
  c.variant = StepsizeVariant::GlobalAdaGrad;
  c.alpha = alpha;
  c.beta = beta;
  c.epsilon = epsilon;
  c.validate();
  return c;
}

StepsizeConfig StepsizeConfig::coord_adagrad(double alpha, double beta,
                                             double epsilon) {
  StepsizeConfig c = global_adagrad(alpha, beta, epsilon);
  c.variant = StepsizeVariant::CoordAdaGrad;
  return c;
}

StepsizeConfig StepsizeConfig::biased_global_adagrad(double alpha, double beta,
                                                     double epsilon) {
  StepsizeConfig c = global_adagrad(alpha, beta, epsilon);
  c.variant = StepsizeVariant::BiasedGlobalAdaGrad;
  return c;
}

StepsizeConfig StepsizeConfig::poly(double power, double scale) {
  StepsizeConfig c;
  c.variant = StepsizeVariant::PolySchedule;
  c.poly_power = power;
  c.poly_scale = scale;
  c.validate();
  return c;
}

void StepsizeConfig::validate() const {
  if (variant == StepsizeVariant::PolySchedule) {
    if (!(poly_power >= 0.0)) throw ConfigError("stepsize.power must be >= 0");
    if (!(poly_scale > 0.0)) throw ConfigError("stepsize.scale must be > 0");
    return;
  }
  if (!(alpha > 0.0)) throw ConfigError("stepsize.alpha must be > 0");
  // beta = 0 would divide by zero at t = 1; the adaptive-stepsize analysis
  // assumes beta > 0 throughout.
  if (!(beta > 0.0)) throw ConfigError("stepsize.beta must be > 0");
  if (!(epsilon >= 0.0 && epsilon <= 0.5)) {
    throw ConfigError("stepsize.epsilon must be in [0, 0.5]");
  }
}

StepsizeState::StepsizeState(const StepsizeConfig& config, int dim)
    : config_(config), acc_(config.beta) {
  config_.validate();
  if (dim < 1) throw ConfigError("stepsize: dim must be >= 1");
  if (config_.is_coordinate_wise()) acc_coord_.assign(dim, config_.beta);
}

double StepsizeState::power_of(double base) const {
  // exponent 1/2 + epsilon; plain sqrt when epsilon = 0
  if (config_.epsilon == 0.0) return std::sqrt(base);
  return std::pow(base, 0.5 + config_.epsilon);
}

double StepsizeState::current_stepsize() const {
  switch (config_.variant) {
    case StepsizeVariant::GlobalAdaGrad:
    case StepsizeVariant::BiasedGlobalAdaGrad:
      return config_.alpha / power_of(acc_);
    case StepsizeVariant::PolySchedule:
      return config_.poly_scale /
             std::pow(static_cast<double>(t_), config_.poly_power);
    case StepsizeVariant::CoordAdaGrad:
      throw ConfigError("stepsize: coordinate-wise variant has no scalar value");
  }
  return 0.0;
}

void StepsizeState::current_stepsizes(Vector& out) const {
  if (!config_.is_coordinate_wise()) {
    throw ConfigError("stepsize: current_stepsizes requires coord_adagrad");
  }
  out.resize(acc_coord_.size());
  for (std::size_t j = 0; j < acc_coord_.size(); ++j) {
    out[j] = config_.alpha / power_of(acc_coord_[j]);
  }
}

double StepsizeState::accumulator() const {
  if (config_.is_coordinate_wise()) {
    throw ConfigError("stepsize: global accumulator requested from coord variant");
  }
  return acc_;
}

const Vector& StepsizeState::coordinate_accumulator() const {
  if (!config_.is_coordinate_wise()) {
    throw ConfigError("stepsize: coordinate accumulator requires coord_adagrad");
  }
  return acc_coord_;
}

void StepsizeState::observe(const Vector& g) {
  if (!is_finite(g)) throw NumericalError("stepsize.observe: non-finite gradient");
  switch (config_.variant) {
    case StepsizeVariant::GlobalAdaGrad:
    case StepsizeVariant::BiasedGlobalAdaGrad:
      acc_ += norm_sq(g);
      break;
    case StepsizeVariant::CoordAdaGrad:
      if (g.size() != acc_coord_.size()) {
        throw ConfigError("stepsize.observe: gradient dimension mismatch");
      }
      for (std::size_t j = 0; j < g.size(); ++j) acc_coord_[j] += g[j] * g[j];
      break;
    case StepsizeVariant::PolySchedule:
      break;
  }
  ++t_;
}

namespace {

ScheduleDiagnostic classify(std::int64_t horizon, double sum_eta,
                            double sum_eta_sq, double sum_eta_half,
                            double sum_eta_sq_half, double sum_eta_quarter,
                            double sum_eta_sq_quarter) {
  ScheduleDiagnostic d;
  d.horizon = horizon;
  d.sum_eta = sum_eta;
  d.sum_eta_sq = sum_eta_sq;
  d.sum_eta_at_half = sum_eta_half;
  d.sum_eta_sq_at_half = sum_eta_sq_half;
  auto shape = [](double full, double half, double quarter) -> std::string {
    double tail = full - half;
    if (!(full > 0.0) || tail <= 1e-4 * full) return "bounded-like";
    double prev = half - quarter;
    // A logarithmic sum adds roughly equal increments per doubling.
    if (prev > 0.0 && tail < 1.5 * prev) return "log-like";
    return "polynomial-like";
  };
  d.sum_eta_growth = shape(sum_eta, sum_eta_half, sum_eta_quarter);
  d.sum_eta_sq_growth = shape(sum_eta_sq, sum_eta_sq_half, sum_eta_sq_quarter);
  return d;
}

}  // namespace

ScheduleDiagnostic robbins_monro_diagnostic(const StepsizeConfig& poly_config,
                                            std::int64_t horizon) {
  if (poly_config.variant != StepsizeVariant::PolySchedule) {
    throw ConfigError("robbins_monro_diagnostic: config must be a poly schedule");
  }
  if (horizon < 1) throw ConfigError("robbins_monro_diagnostic: horizon must be >= 1");
  double s = 0.0, s2 = 0.0, sh = 0.0, s2h = 0.0, sq = 0.0, s2q = 0.0;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    double eta = poly_config.poly_scale /
                 std::pow(static_cast<double>(t), poly_config.poly_power);
    s += eta;
    s2 += eta * eta;
    if (t == horizon / 2) { sh = s; s2h = s2; }
    if (t == horizon / 4) { sq = s; s2q = s2; }
  }
  return classify(horizon, s, s2, sh, s2h, sq, s2q);
}

ScheduleDiagnostic robbins_monro_diagnostic(const std::vector<double>& stepsizes) {
  if (stepsizes.empty()) {
    throw ConfigError("robbins_monro_diagnostic: empty stepsize sequence");
  }
  std::int64_t horizon = static_cast<std::int64_t>(stepsizes.size());
  double s = 0.0, s2 = 0.0, sh = 0.0, s2h = 0.0, sq = 0.0, s2q = 0.0;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    double eta = stepsizes[static_cast<std::size_t>(t - 1)];
    s += eta;
    s2 += eta * eta;
    if (t == horizon / 2) { sh = s; s2h = s2; }
    if (t == horizon / 4) { sq = s; s2q = s2; }
  }
  return classify(horizon, s, s2, sh, s2h, sq, s2q);
}

}  // namespace adastep
