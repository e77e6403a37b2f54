#include "adastep/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "adastep/errors.hpp"

namespace adastep {

double example1_exact(double x_t, double sigma_t, double a_acc, double alpha,
                      double epsilon) {
  if (!(a_acc > 0.0)) throw ConfigError("example1_exact: accumulator must be > 0");
  if (!(alpha > 0.0)) throw ConfigError("example1_exact: alpha must be > 0");
  const double p = 0.5 + epsilon;
  auto term = [&](double prob, double xi) {
    double g = x_t + xi;
    return prob * g * x_t / std::pow(a_acc + g * g, p);
  };
  return alpha * (term(7.0 / 15.0, sigma_t) + term(1.0 / 5.0, -1.5 * sigma_t) +
                  term(1.0 / 3.0, -0.5 * sigma_t));
}

double unbiased_direction_check(double x_t, double sigma_t, double a_acc,
                                double alpha, double epsilon) {
  if (!(a_acc > 0.0)) throw ConfigError("unbiased_direction_check: accumulator must be > 0");
  if (!(alpha > 0.0)) throw ConfigError("unbiased_direction_check: alpha must be > 0");
  (void)sigma_t;  // E[g] = grad, so the mean-zero noise drops out
  return alpha * x_t * x_t / std::pow(a_acc, 0.5 + epsilon);
}

RateEstimate fit_rate(const std::vector<std::pair<double, double>>& points,
                      const std::string& metric_name) {
  if (points.size() < 3) throw ConfigError("fit_rate: needs >= 3 points");
  std::vector<std::pair<double, double>> pts = points;
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i].first > 0.0)) throw ConfigError("fit_rate: horizons must be positive");
    if (i > 0 && pts[i].first == pts[i - 1].first) {
      throw ConfigError("fit_rate: horizons must be distinct");
    }
    if (!(pts[i].second > 0.0)) {
      throw ConfigError(
          "fit_rate: metric must be positive to take logs; use a larger "
          "noise floor or fewer horizons");
    }
  }
  const std::size_t n = pts.size();
  double sx = 0.0, sy = 0.0;
  for (const auto& [t, y] : pts) {
    sx += std::log(t);
    sy += std::log(y);
  }
  double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [t, y] : pts) {
    double dx = std::log(t) - mx;
    double dy = std::log(y) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  RateEstimate est;
  est.metric = metric_name;
  est.slope = sxy / sxx;
  est.intercept = my - est.slope * mx;
  double ss_res = syy - est.slope * sxy;
  est.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  est.horizons.reserve(n);
  for (const auto& [t, y] : pts) est.horizons.push_back(t);
  return est;
}

double BoundEvaluation::markov(double delta) const {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("markov: delta must be in (0,1)");
  if (!valid_regime) return std::numeric_limits<double>::quiet_NaN();
  return std::pow(rhs / delta, 1.0 / (0.5 - epsilon));
}

namespace {

// Shared K for the eps = 0 branch of either theorem, from the implicit
// inequality x^2 <= (A+Bx)(C+D ln(A+Bx)) solved by the logsolvex bound.
double log_branch_k(double a, double b, double c, double d) {
  return d * std::log(2.0 * a + 32.0 * b * b * b * b * d * d +
                      2.0 * b * b * c + 8.0 * b * b * b * d * std::sqrt(c));
}

}  // namespace

BoundEvaluation theorem_convex_bound(const TheoremParams& p) {
  BoundEvaluation out;
  out.epsilon = p.epsilon;
  const double bpow = std::pow(p.beta, 0.5 + p.epsilon);
  if (!(p.alpha > 0.0) || !(p.beta > 0.0) || !(p.epsilon >= 0.0) ||
      !(p.epsilon < 0.5) || !(p.horizon >= 1.0) ||
      !(4.0 * p.alpha * p.smoothness < bpow)) {
    out.valid_regime = false;
    return out;
  }
  out.valid_regime = true;
  const double a = p.alpha, b = p.beta, e = p.epsilon, m = p.smoothness;
  const double s2 = p.sigma * p.sigma, t = p.horizon;
  const double denom = 1.0 - 4.0 * a * m / bpow;
  const double log_t = 1.0 + std::log(t);

  double base = (p.x0_distance * p.x0_distance +
                 (4.0 * a * a / std::pow(b, 1.0 + 2.0 * e)) * log_t * s2) /
                (a * denom);
  if (e > 0.0) {
    out.k_term = (a * a / (2.0 * e * std::pow(b, 2.0 * e))) / (a * denom);
  } else {
    double big_a = std::sqrt(b + 2.0 * t * s2);
    double big_b = 2.0 * std::sqrt(m);
    double big_d = a / denom;
    double big_c = (b * p.x0_distance * p.x0_distance + 4.0 * a * a * log_t * s2) /
                   (2.0 * a * b * denom);
    out.k_term = log_branch_k(big_a, big_b, big_c, big_d);
  }
  out.gamma = base + out.k_term;

  out.branch_smooth = std::pow(2.0, (0.5 + e) / (0.5 - e)) *
                      std::pow(4.0 * m, 0.5 + e) * out.gamma;
  out.branch_noise = std::pow(2.0, 0.5 + e) * std::pow(out.gamma, 0.5 - e) *
                     std::pow(b + 2.0 * t * s2, 0.25 - e * e);
  out.rhs = std::max(out.branch_smooth, out.branch_noise) / std::pow(t, 0.5 - e);
  return out;
}

BoundEvaluation theorem_nonconvex_bound(const TheoremParams& p) {
  BoundEvaluation out;
  out.epsilon = p.epsilon;
  const double bpow = std::pow(p.beta, 0.5 + p.epsilon);
  if (!(p.alpha > 0.0) || !(p.beta > 0.0) || !(p.epsilon >= 0.0) ||
      !(p.epsilon < 0.5) || !(p.horizon >= 1.0) ||
      !(2.0 * p.alpha * p.smoothness < bpow)) {
    out.valid_regime = false;
    return out;
  }
  out.valid_regime = true;
  const double a = p.alpha, b = p.beta, e = p.epsilon, m = p.smoothness;
  const double s2 = p.sigma * p.sigma, t = p.horizon;
  const double denom = 1.0 - 2.0 * a * m / bpow;
  const double log_t = 1.0 + std::log(t);

  double base = (p.f_gap0 +
                 (2.0 * a * a * m / std::pow(b, 1.0 + 2.0 * e)) * log_t * s2) /
                (a * denom);
  if (e > 0.0) {
    out.k_term = (a * a * m / (4.0 * e * std::pow(b, 2.0 * e))) / (a * denom);
  } else {
    double big_a = std::sqrt(b + 2.0 * t * s2);
    double big_b = std::sqrt(2.0);
    double big_d = a * m / denom;
    double big_c = (p.f_gap0 + (2.0 * a * a * m / b) * log_t * s2) / (a * denom);
    out.k_term = log_branch_k(big_a, big_b, big_c, big_d);
  }
  out.gamma = base + out.k_term;

  out.branch_smooth = std::pow(2.0, (0.5 + e) / (0.5 - e)) * out.gamma;
  out.branch_noise = std::pow(2.0, 0.5 + e) *
                     std::pow(b + 2.0 * t * s2, 0.25 - e * e) *
                     std::pow(out.gamma, 0.5 - e);
  out.rhs = std::max(out.branch_smooth, out.branch_noise) / std::pow(t, 0.5 - e);
  return out;
}

BoundReport check_bound_empirically(const BoundProblem& problem, int n_runs) {
  if (!problem.objective) throw ConfigError("bound problem: objective missing");
  if (problem.stepsize.variant != StepsizeVariant::GlobalAdaGrad) {
    throw ConfigError("bound problem: stepsize must be global_adagrad");
  }
  const bool noiseless = problem.noise.kind == NoiseKind::None;
  if (n_runs < (noiseless ? 1 : 100)) {
    throw ConfigError("check_bound_empirically: n_runs too small (>= 100 under noise)");
  }

  TheoremParams params;
  params.alpha = problem.stepsize.alpha;
  params.beta = problem.stepsize.beta;
  params.epsilon = problem.stepsize.epsilon;
  params.smoothness = problem.objective->constants().smoothness;
  params.sigma = noiseless ? 0.0 : problem.noise.subgaussian_sigma();
  params.horizon = static_cast<double>(problem.horizon);
  if (problem.kind == BoundKind::Convex) {
    params.x0_distance = problem.objective->dist_to_minimizer(problem.x0);
  } else {
    params.f_gap0 =
        problem.objective->eval(problem.x0) - problem.objective->constants().f_star;
  }

  BoundEvaluation bound = problem.kind == BoundKind::Convex
                              ? theorem_convex_bound(params)
                              : theorem_nonconvex_bound(params);
  if (!bound.valid_regime) {
    throw ConfigError("check_bound_empirically: theorem precondition violated "
                      "(invalid regime)");
  }

  const double moment = 0.5 - params.epsilon;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n_runs; ++i) {
    RunConfig rc;
    rc.objective = problem.objective;
    rc.noise = problem.noise;
    rc.stepsize = problem.stepsize;
    rc.x0 = problem.x0;
    rc.horizon = problem.horizon;
    rc.seed = problem.seed0 + static_cast<std::uint64_t>(i);
    rc.record_stride = problem.horizon;  // aggregates only; rows not needed
    Trajectory traj = run(rc);
    if (traj.status != RunStatus::Ok) {
      throw NumericalError("check_bound_empirically: run failed at t=" +
                           std::to_string(traj.failed_at));
    }
    double value;
    if (problem.kind == BoundKind::Convex) {
      value = std::pow(select(traj, Selector::Average).f_gap, moment);
    } else {
      value = std::pow(traj.best_grad_norm_sq, moment);
    }
    sum += value;
    sum_sq += value * value;
  }

  BoundReport report;
  report.kind = problem.kind;
  report.n_runs = n_runs;
  report.lhs_mean = sum / n_runs;
  double var = n_runs > 1 ? (sum_sq - sum * sum / n_runs) / (n_runs - 1) : 0.0;
  report.lhs_std_error = var > 0.0 ? std::sqrt(var / n_runs) : 0.0;
  report.bound = bound;
  report.params = params;
  report.satisfied = report.lhs_mean <= bound.rhs + 3.0 * report.lhs_std_error;
  return report;
}

// ---------------------------------------------------------------------------
// Lemma suite
// ---------------------------------------------------------------------------

namespace {

constexpr double kLemmaTol = 1e-9;

struct Checker {
  LemmaCheckResult result;

  void record(double lhs, double rhs, const std::string& instance) {
    ++result.instances;
    double violation = (lhs - rhs) / (1.0 + std::fabs(rhs));
    if (violation > result.worst_violation) result.worst_violation = violation;
    if (violation > kLemmaTol && result.counterexample.empty()) {
      ++result.violations;
      char buf[256];
      std::snprintf(buf, sizeof(buf), "lhs=%.17g rhs=%.17g %s", lhs, rhs,
                    instance.c_str());
      result.counterexample = buf;
    } else if (violation > kLemmaTol) {
      ++result.violations;
    }
  }
};

// Random nonnegative sequence with log-uniform magnitudes and occasional
// exact zeros; lengths up to 10^3.
std::vector<double> random_sequence(Rng& rng) {
  int len = 1 + static_cast<int>(rng.uniform01() * 1000.0);
  std::vector<double> a(len);
  for (auto& v : a) {
    v = rng.uniform01() < 0.1 ? 0.0 : rng.log_uniform(1e-3, 1e3);
  }
  return a;
}

LemmaCheckResult check_sum_bounded(Rng& rng, int n, bool zero_rhs) {
  Checker c;
  c.result.name = "sum_bounded";
  for (int k = 0; k < n; ++k) {
    double a0 = rng.log_uniform(1e-3, 1e3);
    double beta = 1.0 + rng.log_uniform(1e-3, 10.0);
    std::vector<double> a = random_sequence(rng);
    double partial = a0;
    double lhs = 0.0;
    for (double ai : a) {
      partial += ai;
      lhs += ai / std::pow(partial, beta);
    }
    double rhs = 1.0 / ((beta - 1.0) * std::pow(a0, beta - 1.0));
    if (zero_rhs) rhs = 0.0;  // test hook: force the violation path
    char inst[128];
    std::snprintf(inst, sizeof(inst), "a0=%g beta=%g len=%zu", a0, beta, a.size());
    c.record(lhs, rhs, inst);
  }
  return c.result;
}

LemmaCheckResult check_sum_integral(Rng& rng, int n) {
  Checker c;
  c.result.name = "sum_integral";
  for (int k = 0; k < n; ++k) {
    double a0 = rng.log_uniform(1e-3, 1e3);
    std::vector<double> a = random_sequence(rng);
    bool harmonic = rng.uniform01() < 0.5;
    double beta = harmonic ? 1.0 : rng.log_uniform(1e-2, 3.0);
    double partial = a0;
    double lhs = 0.0;
    for (double ai : a) {
      partial += ai;
      lhs += harmonic ? ai / partial : ai * std::pow(partial, -beta);
    }
    double upper = partial;  // a0 + sum of a
    double rhs;
    if (harmonic || std::fabs(beta - 1.0) < 1e-12) {
      rhs = std::log(upper / a0);
    } else {
      rhs = (std::pow(upper, 1.0 - beta) - std::pow(a0, 1.0 - beta)) / (1.0 - beta);
    }
    char inst[128];
    std::snprintf(inst, sizeof(inst), "a0=%g beta=%g len=%zu", a0,
                  harmonic ? 1.0 : beta, a.size());
    c.record(lhs, rhs, inst);
  }
  return c.result;
}

LemmaCheckResult check_smooth(Rng& rng, int n) {
  Checker c;
  c.result.name = "smooth";
  std::vector<ObjectivePtr> suite = {
      make_quadratic(3, {1.0, 4.0, 9.0}, {0.3, -0.2, 0.1}, 11),
      make_logistic(3, 30, 5),
      make_smooth_nonconvex(3),
  };
  for (int k = 0; k < n; ++k) {
    const Objective& obj = *suite[k % suite.size()];
    Vector x(obj.dim());
    for (auto& v : x) v = rng.uniform(-5.0, 5.0);
    double lhs = norm_sq(obj.grad(x));
    double rhs = 2.0 * obj.constants().smoothness *
                 (obj.eval(x) - obj.constants().f_star);
    char inst[128];
    std::snprintf(inst, sizeof(inst), "objective=%s",
                  to_string(obj.kind()).c_str());
    c.record(lhs, rhs, inst);
  }
  return c.result;
}

LemmaCheckResult check_solvex(Rng& rng, int n) {
  Checker c;
  c.result.name = "solvex";
  for (int k = 0; k < n; ++k) {
    double a = rng.uniform01() < 0.05 ? 0.0 : rng.log_uniform(1e-2, 1e2);
    double b = rng.log_uniform(1e-2, 1e2);
    double cc = rng.log_uniform(1e-2, 1e2);
    double eps = rng.uniform(0.0, 0.4);
    double p = 0.5 + eps;
    // Premise boundary: largest x with x <= C(A+Bx)^p. g(x) = C(A+Bx)^p - x
    // is concave with g(0) >= 0, so the premise region is [0, root].
    auto g = [&](double x) { return cc * std::pow(a + b * x, p) - x; };
    double hi = std::max(1.0, cc * std::pow(2.0 * std::max(a, 1.0), p));
    while (g(hi) >= 0.0) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (g(mid) >= 0.0) lo = mid; else hi = mid;
    }
    double x_max = lo;  // tightest premise-satisfying point
    double bound = std::max(std::pow(cc * std::pow(2.0 * b, p), 1.0 / (0.5 - eps)),
                            cc * std::pow(2.0 * a, p));
    char inst[160];
    std::snprintf(inst, sizeof(inst), "A=%g B=%g C=%g eps=%g", a, b, cc, eps);
    c.record(x_max, bound, inst);
  }
  return c.result;
}

LemmaCheckResult check_logsolvex(Rng& rng, int n) {
  Checker c;
  c.result.name = "logsolvex";
  for (int k = 0; k < n; ++k) {
    double a = rng.uniform01() < 0.05 ? 0.0 : rng.log_uniform(1e-2, 1e2);
    double b = rng.log_uniform(1e-2, 1e2);
    double cc = rng.uniform01() < 0.05 ? 0.0 : rng.log_uniform(1e-2, 1e2);
    double d = rng.uniform01() < 0.05 ? 0.0 : rng.log_uniform(1e-2, 1e2);
    if (a == 0.0 && cc == 0.0 && d == 0.0) cc = 1.0;
    double bound = 32.0 * b * b * b * d * d + 2.0 * b * cc +
                   8.0 * b * b * d * std::sqrt(cc) + a / b;
    // h >= 0 is the premise; find its supremum by scanning a log grid and
    // refining the last sign change. The premise region can be disconnected
    // for tiny A+Bx, so scan rather than bisect blindly.
    auto h = [&](double x) {
      double w = a + b * x;
      if (w <= 0.0) return -x * x;
      return w * (cc + d * std::log(w)) - x * x;
    };
    double hi = 2.0 * bound + 10.0;
    double x_best = -1.0;
    double prev_x = 1e-12;
    bool prev_ok = h(prev_x) >= 0.0;
    if (prev_ok) x_best = prev_x;
    const int grid = 400;
    for (int i = 1; i <= grid; ++i) {
      double x = 1e-12 * std::pow(hi / 1e-12, static_cast<double>(i) / grid);
      bool ok = h(x) >= 0.0;
      if (ok) {
        x_best = x;
      } else if (prev_ok) {
        double lo2 = prev_x, hi2 = x;
        for (int it = 0; it < 100; ++it) {
          double mid = 0.5 * (lo2 + hi2);
          if (h(mid) >= 0.0) lo2 = mid; else hi2 = mid;
        }
        x_best = std::max(x_best, lo2);
      }
      prev_ok = ok;
      prev_x = x;
    }
    if (x_best < 0.0) continue;  // premise empty for this instance
    char inst[160];
    std::snprintf(inst, sizeof(inst), "A=%g B=%g C=%g D=%g", a, b, cc, d);
    c.record(x_best, bound, inst);
  }
  return c.result;
}

LemmaCheckResult check_exponential(Rng& rng, int n) {
  Checker c;
  c.result.name = "exponential";
  for (int k = 0; k < n; ++k) {
    double x = rng.uniform01() < 0.05 ? 0.0 : rng.log_uniform(1e-3, 1e3);
    double y = rng.uniform01() < 0.05 ? 0.0 : rng.log_uniform(1e-3, 1e3);
    double p = rng.uniform(0.0, 1.0);
    double lhs = std::pow(x + y, p);
    double rhs = std::pow(x, p) + std::pow(y, p);
    char inst[128];
    std::snprintf(inst, sizeof(inst), "x=%g y=%g p=%g", x, y, p);
    c.record(lhs, rhs, inst);
  }
  return c.result;
}

LemmaCheckResult check_bound_log(Rng& rng, int n) {
  Checker c;
  c.result.name = "bound_log";
  for (int k = 0; k < n; ++k) {
    double x = rng.log_uniform(1e-6, 1e6);
    double alpha = rng.log_uniform(1e-3, 1e3);
    double lhs = std::log(x);
    double rhs = alpha * (std::pow(x, 1.0 / alpha) - 1.0);
    char inst[128];
    std::snprintf(inst, sizeof(inst), "x=%g alpha=%g", x, alpha);
    c.record(lhs, rhs, inst);
  }
  return c.result;
}

}  // namespace

bool LemmaReport::all_passed() const {
  for (const auto& c : checks) {
    if (c.violations > 0) return false;
  }
  return true;
}

LemmaReport lemma_checks(std::uint64_t seed, int n_instances,
                         bool test_hook_zero_rhs) {
  if (n_instances < 1) throw ConfigError("lemma_checks: n must be >= 1");
  LemmaReport report;
  Rng rng(seed, 0);
  report.checks.push_back(check_sum_bounded(rng, n_instances, test_hook_zero_rhs));
  report.checks.push_back(check_sum_integral(rng, n_instances));
  report.checks.push_back(check_smooth(rng, n_instances));
  report.checks.push_back(check_solvex(rng, n_instances));
  report.checks.push_back(check_logsolvex(rng, n_instances));
  report.checks.push_back(check_exponential(rng, n_instances));
  report.checks.push_back(check_bound_log(rng, n_instances));
  return report;
}

LiminfTrend liminf_trend(const Trajectory& traj) {
  if (traj.status != RunStatus::Ok) {
    throw NumericalError("liminf_trend: run failed at t=" +
                         std::to_string(traj.failed_at));
  }
  if (!(traj.epsilon_used > 0.0 && traj.epsilon_used <= 0.5)) {
    throw ConfigError("liminf_trend: run must use epsilon in (0, 1/2]");
  }
  if (!traj.bounded_noise) {
    throw ConfigError("liminf_trend: run must use bounded-support noise");
  }
  if (!traj.lipschitz_objective) {
    throw ConfigError("liminf_trend: objective must be Lipschitz");
  }
  LiminfTrend trend;
  trend.final_stat = traj.liminf_stat;
  std::int64_t ref_t = std::max<std::int64_t>(1, traj.horizon / 100);
  for (const auto& row : traj.checkpoints) {
    if (row.t >= ref_t) {
      trend.reference_t = row.t;
      trend.reference_stat = row.liminf_stat;
      break;
    }
  }
  trend.decreasing =
      traj.horizon > 1 && trend.final_stat <= 0.1 * trend.reference_stat;
  return trend;
}

}  // namespace adastep
