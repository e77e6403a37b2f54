// Turns trajectories into verdicts: the exact biased-step expectation and
// its delayed counterpart, log-log rate fitting, theorem-bound evaluation
// with the Markov confidence transform, numeric checks of the standalone
// inequalities, and the long-run liminf trend statistic.

#ifndef ADASTEP_ANALYSIS_HPP
#define ADASTEP_ANALYSIS_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adastep/optimizer.hpp"

namespace adastep {

/// Exact E[<eta_{t+1} g_t, grad f(x_t)>] for f(x) = x^2/2 under three-point
/// noise, with the stepsize including the current gradient:
///   alpha * sum over xi in {+s, -(3/2)s, -(1/2)s} of
///     P(xi) * (x + xi) x / (a_acc + (x + xi)^2)^(1/2+eps),
/// probabilities {7/15, 1/5, 1/3}. Negative for suitable parameters: the
/// update direction turns against the gradient in expectation.
double example1_exact(double x_t, double sigma_t, double a_acc, double alpha,
                      double epsilon);

/// Same inner product with the delayed stepsize eta_t = alpha/a_acc^(1/2+eps)
/// that ignores g_t: the noise averages out and the expectation equals
/// eta_t * x_t^2 >= 0 exactly, independent of sigma_t.
double unbiased_direction_check(double x_t, double sigma_t, double a_acc,
                                double alpha, double epsilon);

struct RateEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> horizons;
  std::string metric;
};

/// Ordinary least squares of ln(metric) on ln(T); the slope is the empirical
/// rate exponent. Requires >= 3 points with distinct horizons and strictly
/// positive metric values.
RateEstimate fit_rate(const std::vector<std::pair<double, double>>& points,
                      const std::string& metric_name = "");

/// Inputs of the finite-time theorem bounds.
struct TheoremParams {
  double alpha = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;
  double smoothness = 0.0;
  double sigma = 0.0;    // sub-Gaussian noise scale (H4' sense)
  double horizon = 0.0;  // T
  double x0_distance = 0.0;  // ||x_1 - x*||, convex bound only
  double f_gap0 = 0.0;       // f(x_1) - f*, nonconvex bound only
};

/// Evaluated right-hand side of a theorem bound at explicit proof-level
/// constants. rhs bounds E[(f(avg x) - f*)^(1/2-eps)] (convex) or
/// E[min_t ||grad f(x_t)||^(1-2eps)] (nonconvex).
struct BoundEvaluation {
  bool valid_regime = false;  // parameter precondition satisfied
  double gamma = 0.0;
  double k_term = 0.0;
  double branch_smooth = 0.0;  // first max() argument (noise-free regime)
  double branch_noise = 0.0;   // second max() argument (noise-driven regime)
  double rhs = 0.0;
  double epsilon = 0.0;

  /// With probability >= 1 - delta the untransformed quantity (the
  /// suboptimality gap, or the min squared gradient norm) is below
  /// (rhs/delta)^(1/(1/2-eps)): Markov's inequality applied to the moment
  /// bound. No empirical coverage claim is made.
  double markov(double delta) const;
};

/// Bound for convex objectives on the average iterate.
/// Precondition: 4*alpha*M < beta^(1/2+eps), 0 <= eps < 1/2; otherwise the
/// result is flagged invalid and rhs is undefined.
///   gamma = (||x*-x1||^2 + (4a^2/b^(1+2e))(1+ln T) s^2) / (a(1-4aM/b^(1/2+e))) + K
///   K(e>0) = (a^2/(2e b^(2e))) / (a(1-4aM/b^(1/2+e)))
///   K(e=0) = D ln(2A + 32B^4 D^2 + 2B^2 C + 8B^3 D sqrt(C)) with
///     A = sqrt(b+2Ts^2), B = 2 sqrt(M), D = a/(1-4aM/sqrt(b)),
///     C = (b ||x1-x*||^2 + 4a^2 (1+ln T) s^2) / (2ab(1-4aM/sqrt(b)))
///   rhs = T^-(1/2-e) max(2^((1/2+e)/(1/2-e)) (4M)^(1/2+e) gamma,
///                        2^(1/2+e) gamma^(1/2-e) (b+2Ts^2)^(1/4-e^2))
BoundEvaluation theorem_convex_bound(const TheoremParams& p);

/// Bound for smooth (possibly nonconvex) objectives on the best iterate.
/// Precondition: 2*alpha*M < beta^(1/2+eps).
///   gamma = (f(x1)-f* + (2a^2 M/b^(1+2e))(1+ln T) s^2) / (a(1-2aM/b^(1/2+e))) + K
///   K(e>0) = (a^2 M/(4e b^(2e))) / (a(1-2aM/b^(1/2+e)))
///   K(e=0) as above with A = sqrt(b+2Ts^2), B = sqrt(2), D = aM/(1-2aM/sqrt(b)),
///     C = (f(x1)-f* + (2a^2 M/b)(1+ln T) s^2) / (a(1-2aM/sqrt(b)))
///   rhs = T^-(1/2-e) max(2^((1/2+e)/(1/2-e)) gamma,
///                        2^(1/2+e) (b+2Ts^2)^(1/4-e^2) gamma^(1/2-e))
BoundEvaluation theorem_nonconvex_bound(const TheoremParams& p);

enum class BoundKind { Convex, Nonconvex };

/// A bound-vs-simulation comparison problem. The stepsize must be the global
/// AdaGrad policy (the bounds are stated for it).
struct BoundProblem {
  BoundKind kind = BoundKind::Convex;
  ObjectivePtr objective;
  NoiseModel noise;
  StepsizeConfig stepsize;
  Vector x0;
  std::int64_t horizon = 1;
  std::uint64_t seed0 = 1;
};

struct BoundReport {
  BoundKind kind = BoundKind::Convex;
  int n_runs = 0;
  double lhs_mean = 0.0;
  double lhs_std_error = 0.0;
  BoundEvaluation bound;
  TheoremParams params;
  bool satisfied = false;  // lhs_mean <= rhs + 3 * std_error
};

/// Monte Carlo LHS over seeded runs against the evaluated theorem RHS.
/// LHS per run: (f gap of the average iterate)^(1/2-eps) for the convex
/// bound, (min_t ||grad f(x_t)||^2)^(1/2-eps) for the nonconvex one.
/// Throws ConfigError when the parameter precondition fails.
/// n_runs >= 100 required under stochastic noise; 1 suffices when the
/// oracle is noiseless (the run is deterministic).
BoundReport check_bound_empirically(const BoundProblem& problem, int n_runs);

struct LemmaCheckResult {
  std::string name;
  int instances = 0;
  int violations = 0;
  double worst_violation = 0.0;  // max of (lhs - rhs) / (1 + |rhs|)
  std::string counterexample;    // first violating instance, when any
};

struct LemmaReport {
  std::vector<LemmaCheckResult> checks;
  bool all_passed() const;
};

/// Randomized numeric audit of the standalone inequalities:
///   sum_bounded    sum a_t/(a0+sum_{i<=t} a_i)^b <= 1/((b-1) a0^(b-1)), b > 1
///   sum_integral   sum a_t f(a0+sum_{i<=t} a_i) <= integral of f over
///                  [a0, a0+sum a], f nonincreasing from {x^-b, 1/x}
///   smooth         ||grad f(x)||^2 <= 2 M (f(x) - f*) on the objective suite
///   solvex         x <= C(A+Bx)^(1/2+e) implies
///                  x < max([C(2B)^(1/2+e)]^(1/(1/2-e)), C(2A)^(1/2+e))
///   logsolvex      x^2 <= (A+Bx)(C+D ln(A+Bx)) implies
///                  x < 32B^3D^2 + 2BC + 8B^2D sqrt(C) + A/B
///   exponential    (x+y)^p <= x^p + y^p for x,y >= 0, p in [0,1]
///   bound_log      ln x <= a(x^(1/a) - 1) for x > 0, a > 0
/// A violation is any excess beyond 1e-9 * (1 + |rhs|).
/// test_hook_zero_rhs deliberately zeroes one bound so the negative path of
/// the checker itself can be exercised; never set outside tests.
LemmaReport lemma_checks(std::uint64_t seed, int n_instances,
                         bool test_hook_zero_rhs = false);

struct LiminfTrend {
  double final_stat = 0.0;
  double reference_stat = 0.0;
  std::int64_t reference_t = 0;
  bool decreasing = false;  // final <= 0.1 * reference
};

/// Final value of min_{s<=t} ||grad f(x_s)||^2 s^(1/2-eps) and whether it
/// fell by at least 10x since ~T/100. Requires a run with eps in (0, 1/2],
/// bounded-support noise and a Lipschitz objective; an asymptotic statement
/// is not verifiable from a finite prefix, so this is a trend proxy only.
LiminfTrend liminf_trend(const Trajectory& traj);

}  // namespace adastep

#endif  // ADASTEP_ANALYSIS_HPP
