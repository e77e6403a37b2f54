#include "adastep/noise.hpp"

#include <cmath>
#include <limits>

#include "adastep/errors.hpp"

namespace adastep {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::BoundedSphere: return "bounded_sphere";
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::ThreePoint: return "three_point";
  }
  return "unknown";
}

NoiseModel NoiseModel::bounded_sphere(double radius) {
  if (!(radius > 0.0)) throw ConfigError("noise.radius must be > 0");
  return {NoiseKind::BoundedSphere, radius};
}

NoiseModel NoiseModel::gaussian(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("noise.sigma must be > 0");
  return {NoiseKind::Gaussian, sigma};
}

NoiseModel NoiseModel::three_point(double magnitude) {
  if (!(magnitude > 0.0)) throw ConfigError("noise.magnitude must be > 0");
  return {NoiseKind::ThreePoint, magnitude};
}

double NoiseModel::support_radius() const {
  switch (kind) {
    case NoiseKind::None: return 0.0;
    case NoiseKind::BoundedSphere: return scale;
    case NoiseKind::ThreePoint: return 1.5 * scale;  // largest of the three atoms
    case NoiseKind::Gaussian:
      throw ConfigError("noise: gaussian has unbounded support");
  }
  return 0.0;
}

double NoiseModel::subgaussian_sigma() const {
  // Bounded support ||xi|| <= S gives E[exp(||xi||^2/S^2)] <= e directly.
  // For the Gaussian model E[exp(||xi||^2/s^2)] = (1 - 2 scale^2/(d s^2))^(-d/2);
  // at s = 2*scale this equals (1 - 1/(2d))^(-d/2) <= sqrt(2) for every d >= 1.
  switch (kind) {
    case NoiseKind::None: return 0.0;
    case NoiseKind::BoundedSphere: return scale;
    case NoiseKind::ThreePoint: return 1.5 * scale;
    case NoiseKind::Gaussian: return 2.0 * scale;
  }
  return 0.0;
}

void NoiseModel::validate(int dim) const {
  if (kind == NoiseKind::ThreePoint && dim != 1) {
    throw ConfigError("noise: three_point is 1-dimensional only");
  }
}

Vector sample_noise(const NoiseModel& model, int dim, Rng& rng) {
  Vector out;
  sample_noise_into(model, dim, rng, out);
  return out;
}

void sample_noise_into(const NoiseModel& model, int dim, Rng& rng, Vector& out) {
  model.validate(dim);
  out.resize(dim);
  switch (model.kind) {
    case NoiseKind::None:
      out.assign(dim, 0.0);
      return;
    case NoiseKind::BoundedSphere: {
      // Uniform in the ball: normalized Gaussian direction, radius S*U^(1/d).
      double n = 0.0;
      do {
        for (int i = 0; i < dim; ++i) out[i] = rng.normal();
        n = norm(out);
      } while (n == 0.0);
      double r = model.scale * std::pow(rng.uniform01(), 1.0 / dim);
      for (int i = 0; i < dim; ++i) out[i] *= r / n;
      return;
    }
    case NoiseKind::Gaussian: {
      double c = model.scale / std::sqrt(static_cast<double>(dim));
      for (int i = 0; i < dim; ++i) out[i] = c * rng.normal();
      return;
    }
    case NoiseKind::ThreePoint: {
      double u = rng.uniform01();
      double s = model.scale;
      out[0] = u < 7.0 / 15.0 ? s : (u < 7.0 / 15.0 + 1.0 / 5.0 ? -1.5 * s : -0.5 * s);
      return;
    }
  }
}

Vector sample_gradient(const GradientOracle& oracle, const Vector& x, Rng& rng) {
  Vector g = oracle.objective->grad(x);
  Vector xi = sample_noise(oracle.noise, oracle.objective->dim(), rng);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += xi[i];
  return g;
}

double check_unbiased(const GradientOracle& oracle, const Vector& x, int n,
                      Rng& rng) {
  if (n < 1000) throw ConfigError("check_unbiased: n must be >= 1000");
  int dim = oracle.objective->dim();
  Vector g = oracle.objective->grad(x);
  // Accumulate sample - grad so the zero-noise oracle reports exactly 0.
  Vector dev(dim, 0.0);
  for (int k = 0; k < n; ++k) {
    Vector sample = sample_gradient(oracle, x, rng);
    for (int i = 0; i < dim; ++i) dev[i] += sample[i] - g[i];
  }
  for (int i = 0; i < dim; ++i) dev[i] /= n;
  return norm(dev);
}

SubgaussianMomentEstimate check_subgaussian_moment(const NoiseModel& model,
                                                   int dim, double sigma_claim,
                                                   int n, Rng& rng) {
  if (model.kind == NoiseKind::None) {
    throw ConfigError("check_subgaussian_moment: noise kind must not be none");
  }
  if (n < 10000) throw ConfigError("check_subgaussian_moment: n must be >= 10^4");
  SubgaussianMomentEstimate out;
  if (!(sigma_claim > 0.0)) {
    out.estimate = std::numeric_limits<double>::infinity();
    out.overflowed = true;
    out.diagnostic = "sigma_claim must be > 0";
    return out;
  }
  double acc = 0.0;
  const double s2 = sigma_claim * sigma_claim;
  for (int k = 0; k < n; ++k) {
    Vector xi = sample_noise(model, dim, rng);
    double e = norm_sq(xi) / s2;
    if (e > 700.0) {  // exp would overflow double range
      out.estimate = std::numeric_limits<double>::infinity();
      out.overflowed = true;
      out.diagnostic = "exp overflow: sigma_claim too small for this model";
      return out;
    }
    acc += std::exp(e);
  }
  out.estimate = acc / n;
  return out;
}

}  // namespace adastep
