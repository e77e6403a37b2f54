#include "adastep/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "adastep/errors.hpp"

namespace adastep {

void RunConfig::validate() const {
  if (!objective) throw ConfigError("run.objective is missing");
  if (horizon < 1) throw ConfigError("run.horizon must be >= 1");
  if (record_stride < 1) throw ConfigError("run.record_stride must be >= 1");
  if (static_cast<int>(x0.size()) != objective->dim()) {
    throw ConfigError("run.x0 must have the objective's dimension");
  }
  if (!is_finite(x0)) throw ConfigError("run.x0 must be finite");
  noise.validate(objective->dim());
  stepsize.validate();
  for (std::size_t i = 0; i < milestones.size(); ++i) {
    if (milestones[i] < 1 || milestones[i] > horizon) {
      throw ConfigError("run.milestones must lie in [1, horizon]");
    }
    if (i > 0 && milestones[i] <= milestones[i - 1]) {
      throw ConfigError("run.milestones must be strictly increasing");
    }
  }
}

namespace {

// Checkpoint grid: the arithmetic stride grid (thinned to at most 10^4
// points) merged with a geometric grid, so long runs stay summarizable
// without losing the early iterations. t = 1, t = T and t = T/100 (the
// liminf reference point) are always present.
std::vector<std::int64_t> build_checkpoint_grid(std::int64_t horizon,
                                                std::int64_t stride) {
  std::set<std::int64_t> grid;
  std::int64_t s = std::max(stride, (horizon + 9999) / 10000);
  for (std::int64_t t = 1; t <= horizon; t += s) grid.insert(t);
  const double ratio = 1.1;
  for (double g = 1.0; g <= static_cast<double>(horizon); g *= ratio) {
    grid.insert(static_cast<std::int64_t>(g));
  }
  grid.insert(1);
  grid.insert(horizon);
  grid.insert(std::max<std::int64_t>(1, horizon / 100));
  return {grid.begin(), grid.end()};
}

}  // namespace

SgdEngine::SgdEngine(const RunConfig& config)
    : config_(config),
      stepsize_(config.stepsize, config.objective ? config.objective->dim() : 1) {
  config_.validate();
  const int dim = config_.objective->dim();
  x_ = config_.x0;

  traj_.dim = dim;
  traj_.f_star = config_.objective->constants().f_star;
  traj_.epsilon_used = config_.stepsize.is_adagrad() ? config_.stepsize.epsilon : 0.0;
  traj_.bounded_noise = config_.noise.bounded_support();
  traj_.lipschitz_objective = config_.objective->constants().lipschitz.has_value();
  traj_.objective = config_.objective;
  traj_.sum_x.assign(dim, 0.0);
  traj_.last_x = x_;
  traj_.best_grad_norm_sq = std::numeric_limits<double>::infinity();
  traj_.liminf_stat = std::numeric_limits<double>::infinity();

  exponent_ = 0.5 - traj_.epsilon_used;
  checkpoint_grid_ = build_checkpoint_grid(config_.horizon, config_.record_stride);
}

void SgdEngine::fail(std::int64_t at) {
  traj_.status = RunStatus::NumericalFailure;
  traj_.failed_at = at;
}

bool SgdEngine::step(Rng& rng, const StepObserver& observer) {
  if (traj_.status != RunStatus::Ok || t_ > config_.horizon) return false;
  const int dim = traj_.dim;
  const Objective& obj = *config_.objective;
  const bool coord = config_.stepsize.is_coordinate_wise();
  const bool biased =
      config_.stepsize.variant == StepsizeVariant::BiasedGlobalAdaGrad;

  obj.grad_into(x_, grad_buf_);
  if (!is_finite(grad_buf_)) {
    fail(t_);
    return false;
  }
  double gnsq = norm_sq(grad_buf_);

  // Prefix statistics of x_t, exact over every step.
  for (int i = 0; i < dim; ++i) traj_.sum_x[i] += x_[i];
  if (gnsq < traj_.best_grad_norm_sq) {
    traj_.best_grad_norm_sq = gnsq;
    traj_.best_t = t_;
    traj_.best_x = x_;
  }
  double stat = gnsq * std::pow(static_cast<double>(t_), exponent_);
  traj_.liminf_stat = std::min(traj_.liminf_stat, stat);
  traj_.last_x = x_;
  traj_.last_t = t_;

  sample_noise_into(config_.noise, dim, rng, noise_buf_);
  g_buf_.resize(dim);
  for (int i = 0; i < dim; ++i) g_buf_[i] = grad_buf_[i] + noise_buf_[i];
  if (!is_finite(g_buf_)) {
    fail(t_);
    return false;
  }

  // The biased variant folds the current gradient into the accumulator
  // before the stepsize is read; every other variant reads first.
  if (biased) stepsize_.observe(g_buf_);

  double eta_min, eta_max;
  if (coord) {
    stepsize_.current_stepsizes(eta_buf_);
    eta_min = eta_buf_[0];
    eta_max = eta_buf_[0];
    for (int i = 1; i < dim; ++i) {
      eta_min = std::min(eta_min, eta_buf_[i]);
      eta_max = std::max(eta_max, eta_buf_[i]);
    }
  } else {
    double eta = stepsize_.current_stepsize();
    eta_buf_.assign(1, eta);
    eta_min = eta;
    eta_max = eta;
  }

  if (checkpoint_idx_ < checkpoint_grid_.size() &&
      checkpoint_grid_[checkpoint_idx_] == t_) {
    ++checkpoint_idx_;
    CheckpointRow row;
    row.t = t_;
    row.f_gap = obj.eval(x_) - traj_.f_star;
    row.grad_norm_sq = gnsq;
    row.eta_min = eta_min;
    row.eta_max = eta_max;
    row.liminf_stat = traj_.liminf_stat;
    traj_.checkpoints.push_back(row);
  }
  if (milestone_idx_ < config_.milestones.size() &&
      config_.milestones[milestone_idx_] == t_) {
    ++milestone_idx_;
    avg_buf_.resize(dim);
    for (int i = 0; i < dim; ++i) {
      avg_buf_[i] = traj_.sum_x[i] / static_cast<double>(t_);
    }
    MilestoneRow row;
    row.t = t_;
    row.f_gap_average_iterate = obj.eval(avg_buf_) - traj_.f_star;
    row.min_grad_norm_sq = traj_.best_grad_norm_sq;
    row.liminf_stat = traj_.liminf_stat;
    traj_.milestones.push_back(row);
  }

  double eta_sq_g_sq = 0.0;
  double eta_dir = 0.0;
  if (coord) {
    for (int i = 0; i < dim; ++i) {
      double step = eta_buf_[i] * g_buf_[i];
      x_[i] -= step;
      eta_sq_g_sq += step * step;
      eta_dir += grad_buf_[i] * eta_buf_[i] * grad_buf_[i];
    }
  } else {
    double eta = eta_buf_[0];
    for (int i = 0; i < dim; ++i) {
      double step = eta * g_buf_[i];
      x_[i] -= step;
      eta_sq_g_sq += step * step;
    }
    eta_dir = eta * gnsq;
  }
  traj_.sum_eta_sq_g_sq += eta_sq_g_sq;
  traj_.sum_eta_dir_grad += eta_dir;

  if (!biased) stepsize_.observe(g_buf_);

  if (observer) {
    StepRecord rec;
    rec.t = t_;
    rec.eta = eta_buf_;
    rec.g = g_buf_;
    rec.x_after = x_;
    if (coord) {
      stepsize_.current_stepsizes(rec.eta_next);
    } else {
      rec.eta_next.assign(1, stepsize_.current_stepsize());
    }
    observer(rec);
  }

  traj_.horizon = t_;
  ++t_;

  if (!is_finite(x_)) {
    fail(t_ - 1);
    return false;
  }
  return true;
}

Trajectory SgdEngine::finish() && { return std::move(traj_); }

Trajectory run(const RunConfig& config, const StepObserver& observer) {
  SgdEngine engine(config);
  Rng rng(config.seed, 0);
  for (std::int64_t t = 0; t < config.horizon; ++t) {
    if (!engine.step(rng, observer)) break;
  }
  return std::move(engine).finish();
}

Selection select(const Trajectory& traj, Selector which) {
  if (traj.status != RunStatus::Ok) {
    throw NumericalError("select: run failed at t=" +
                         std::to_string(traj.failed_at) +
                         " (partial trajectory has " +
                         std::to_string(traj.horizon) + " completed steps)");
  }
  const Objective& obj = *traj.objective;
  Selection sel;
  switch (which) {
    case Selector::Last:
      sel.x = traj.last_x;
      sel.t = traj.last_t;
      break;
    case Selector::Average: {
      sel.x.resize(traj.sum_x.size());
      for (std::size_t i = 0; i < traj.sum_x.size(); ++i) {
        sel.x[i] = traj.sum_x[i] / static_cast<double>(traj.horizon);
      }
      sel.t = traj.horizon;
      break;
    }
    case Selector::BestGradient:
      sel.x = traj.best_x;
      sel.t = traj.best_t;
      break;
  }
  sel.f_gap = obj.eval(sel.x) - traj.f_star;
  sel.grad_norm_sq = norm_sq(obj.grad(sel.x));
  return sel;
}

BiasedStepEstimate run_biased_step(double x_t, double sigma_t, double a_acc,
                                   double alpha, double epsilon, Rng& rng,
                                   std::int64_t n) {
  if (!(a_acc > 0.0)) throw ConfigError("run_biased_step: accumulator must be > 0");
  if (!(alpha > 0.0)) throw ConfigError("run_biased_step: alpha must be > 0");
  if (!(sigma_t >= 0.0)) throw ConfigError("run_biased_step: sigma must be >= 0");
  if (n < 1) throw ConfigError("run_biased_step: n must be >= 1");

  double sum = 0.0, sum_sq = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    double u = rng.uniform01();
    double xi = u < 7.0 / 15.0
                    ? sigma_t
                    : (u < 7.0 / 15.0 + 1.0 / 5.0 ? -1.5 * sigma_t : -0.5 * sigma_t);
    double g = x_t + xi;  // gradient of x^2/2 plus noise
    double v = alpha * g * x_t / std::pow(a_acc + g * g, 0.5 + epsilon);
    sum += v;
    sum_sq += v * v;
  }
  BiasedStepEstimate est;
  est.n = n;
  est.mean = sum / n;
  double var = n > 1 ? (sum_sq - sum * sum / n) / (n - 1) : 0.0;
  est.std_error = var > 0.0 ? std::sqrt(var / n) : 0.0;
  return est;
}

}  // namespace adastep
