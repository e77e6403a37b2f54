// Stochastic first-order oracle: g(x, xi) = grad f(x) + xi with pluggable
// zero-mean noise models, plus sample-based audits of the oracle contracts.

#ifndef ADASTEP_NOISE_HPP
#define ADASTEP_NOISE_HPP

#include <string>

#include "adastep/objective.hpp"
#include "adastep/rng.hpp"
#include "adastep/vec.hpp"

namespace adastep {

enum class NoiseKind { None, BoundedSphere, Gaussian, ThreePoint };

std::string to_string(NoiseKind kind);

/// Additive gradient-noise law. Immutable and shareable.
///
///   None          - xi = 0.
///   BoundedSphere - xi uniform in the closed ball of radius `scale`
///                   (bounded support: ||xi|| <= scale surely).
///   Gaussian      - xi_j ~ N(0, scale^2/d) i.i.d., so E||xi||^2 = scale^2.
///                   The per-coordinate variance is normalized by the
///                   dimension so `scale` always means the total expected
///                   squared noise norm, whatever the dimension.
///   ThreePoint    - scalar xi in {+s, -(3/2)s, -(1/2)s} with probabilities
///                   {7/15, 1/5, 1/3}; zero mean, variance exactly s^2,
///                   1-dimensional only.
struct NoiseModel {
  NoiseKind kind = NoiseKind::None;
  double scale = 0.0;

  static NoiseModel none() { return {NoiseKind::None, 0.0}; }
  static NoiseModel bounded_sphere(double radius);
  static NoiseModel gaussian(double sigma);
  static NoiseModel three_point(double magnitude);

  /// True when ||xi|| is surely bounded (the bounded-support noise class);
  /// Gaussian noise does not qualify. Tests that rely on bounded support
  /// must check this flag.
  bool bounded_support() const { return kind != NoiseKind::Gaussian; }

  /// Sure bound on ||xi|| for bounded-support models.
  double support_radius() const;

  /// A scale s with E[exp(||xi||^2 / s^2)] <= e (the sub-Gaussian moment
  /// contract). For bounded-support models the support radius qualifies;
  /// for Gaussian noise with E||xi||^2 = scale^2, sqrt(2)*scale does.
  double subgaussian_sigma() const;

  void validate(int dim) const;
};

struct GradientOracle {
  ObjectivePtr objective;
  NoiseModel noise;
};

/// One noise draw; dim must be compatible with the model.
Vector sample_noise(const NoiseModel& model, int dim, Rng& rng);

/// sample_noise without the return-value allocation.
void sample_noise_into(const NoiseModel& model, int dim, Rng& rng, Vector& out);

/// grad f(x) + xi.
Vector sample_gradient(const GradientOracle& oracle, const Vector& x, Rng& rng);

/// || (1/n) sum of n samples - grad f(x) ||. Near 0 for an unbiased oracle
/// (at most a few standard errors of the Monte Carlo mean).
double check_unbiased(const GradientOracle& oracle, const Vector& x, int n,
                      Rng& rng);

struct SubgaussianMomentEstimate {
  double estimate = 0.0;  // +inf when overflowed
  bool overflowed = false;
  std::string diagnostic;
};

/// Monte Carlo estimate of E[exp(||xi||^2 / sigma_claim^2)] over n draws.
/// Exponent overflow is reported as +inf with a diagnostic (the claim is too
/// small for the model).
SubgaussianMomentEstimate check_subgaussian_moment(const NoiseModel& model,
                                                   int dim, double sigma_claim,
                                                   int n, Rng& rng);

}  // namespace adastep

#endif  // ADASTEP_NOISE_HPP
