#include "adastep/objective.hpp"

#include <cmath>
#include <cstdio>

#include "adastep/errors.hpp"
#include "adastep/rng.hpp"

namespace adastep {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  double m = z > 0.0 ? z : 0.0;
  return m + std::log1p(std::exp(-std::fabs(z)));
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Householder QR of a square matrix (row-major, in place); accumulates Q.
// Signs are fixed so that R has positive diagonal, making Q unique.
void householder_qr_q(std::vector<double>& a, int d, std::vector<double>& q) {
  q.assign(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) q[static_cast<std::size_t>(i) * d + i] = 1.0;

  std::vector<double> v(d);
  for (int k = 0; k < d; ++k) {
    double nrm = 0.0;
    for (int i = k; i < d; ++i) {
      double aik = a[static_cast<std::size_t>(i) * d + k];
      nrm += aik * aik;
    }
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) continue;
    double akk = a[static_cast<std::size_t>(k) * d + k];
    double alpha = akk >= 0.0 ? -nrm : nrm;
    double vnorm_sq = 0.0;
    for (int i = k; i < d; ++i) {
      v[i] = a[static_cast<std::size_t>(i) * d + k];
      if (i == k) v[i] -= alpha;
      vnorm_sq += v[i] * v[i];
    }
    if (vnorm_sq == 0.0) continue;
    // Apply H = I - 2 v v^T / (v^T v) from the left to A and to Q.
    for (int j = k; j < d; ++j) {
      double s = 0.0;
      for (int i = k; i < d; ++i) s += v[i] * a[static_cast<std::size_t>(i) * d + j];
      double c = 2.0 * s / vnorm_sq;
      for (int i = k; i < d; ++i) a[static_cast<std::size_t>(i) * d + j] -= c * v[i];
    }
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int i = k; i < d; ++i) s += v[i] * q[static_cast<std::size_t>(i) * d + j];
      double c = 2.0 * s / vnorm_sq;
      for (int i = k; i < d; ++i) q[static_cast<std::size_t>(i) * d + j] -= c * v[i];
    }
    // Flip row k of Q if the R diagonal came out negative.
    if (a[static_cast<std::size_t>(k) * d + k] < 0.0) {
      for (int j = k; j < d; ++j) a[static_cast<std::size_t>(k) * d + j] = -a[static_cast<std::size_t>(k) * d + j];
      for (int j = 0; j < d; ++j) q[static_cast<std::size_t>(k) * d + j] = -q[static_cast<std::size_t>(k) * d + j];
    }
  }
}

// Nonconvex scalar kernel and its derivative.
inline double kernel(double u) { return u * u / (1.0 + u * u); }
inline double kernel_deriv(double u) {
  double w = 1.0 + u * u;
  return 2.0 * u / (w * w);
}

}  // namespace

std::string to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::Quadratic: return "quadratic";
    case ObjectiveKind::Logistic: return "logistic";
    case ObjectiveKind::SmoothNonconvex: return "smooth_nonconvex";
  }
  return "unknown";
}

void Objective::check_input(const Vector& x) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw ConfigError("objective: input has dimension " +
                      std::to_string(x.size()) + ", expected " +
                      std::to_string(dim_));
  }
  if (!is_finite(x)) {
    throw NumericalError("objective: non-finite input vector");
  }
}

double Objective::eval(const Vector& x) const {
  check_input(x);
  switch (kind_) {
    case ObjectiveKind::Quadratic: {
      const Vector& xs = *constants_.x_star;
      double acc = 0.0;
      for (int i = 0; i < dim_; ++i) {
        double row = 0.0;
        for (int j = 0; j < dim_; ++j) {
          row += matrix_[static_cast<std::size_t>(i) * dim_ + j] * (x[j] - xs[j]);
        }
        acc += (x[i] - xs[i]) * row;
      }
      return 0.5 * acc;
    }
    case ObjectiveKind::Logistic: {
      double acc = 0.0;
      for (int i = 0; i < n_samples_; ++i) {
        double m = 0.0;
        for (int j = 0; j < dim_; ++j) {
          m += features_[static_cast<std::size_t>(i) * dim_ + j] * x[j];
        }
        acc += softplus(-labels_[i] * m);
      }
      return acc / n_samples_;
    }
    case ObjectiveKind::SmoothNonconvex: {
      double acc = 0.0;
      for (int i = 0; i < dim_; ++i) acc += kernel(x[i]);
      return acc;
    }
  }
  return 0.0;
}

Vector Objective::grad(const Vector& x) const {
  Vector g;
  grad_into(x, g);
  return g;
}

void Objective::grad_into(const Vector& x, Vector& g) const {
  check_input(x);
  g.assign(dim_, 0.0);
  switch (kind_) {
    case ObjectiveKind::Quadratic: {
      const Vector& xs = *constants_.x_star;
      for (int i = 0; i < dim_; ++i) {
        double row = 0.0;
        for (int j = 0; j < dim_; ++j) {
          row += matrix_[static_cast<std::size_t>(i) * dim_ + j] * (x[j] - xs[j]);
        }
        g[i] = row;
      }
      return;
    }
    case ObjectiveKind::Logistic: {
      for (int i = 0; i < n_samples_; ++i) {
        double m = 0.0;
        for (int j = 0; j < dim_; ++j) {
          m += features_[static_cast<std::size_t>(i) * dim_ + j] * x[j];
        }
        double c = -labels_[i] * sigmoid(-labels_[i] * m) / n_samples_;
        for (int j = 0; j < dim_; ++j) {
          g[j] += c * features_[static_cast<std::size_t>(i) * dim_ + j];
        }
      }
      return;
    }
    case ObjectiveKind::SmoothNonconvex: {
      for (int i = 0; i < dim_; ++i) g[i] = kernel_deriv(x[i]);
      return;
    }
  }
}

double Objective::dist_to_minimizer(const Vector& x) const {
  check_input(x);
  if (!constants_.x_star) {
    throw ConfigError("objective: " + to_string(kind_) +
                      " has no finite minimizer (x_star)");
  }
  return norm(sub(x, *constants_.x_star));
}

ObjectivePtr make_quadratic(int dim, const Vector& eigenvalues,
                            const Vector& x_star, std::uint64_t rotation_seed) {
  if (dim < 1) throw ConfigError("make_quadratic: dim must be >= 1");
  if (static_cast<int>(eigenvalues.size()) != dim) {
    throw ConfigError("make_quadratic: eigenvalues must have length dim");
  }
  if (static_cast<int>(x_star.size()) != dim) {
    throw ConfigError("make_quadratic: x_star must have length dim");
  }
  double max_eig = 0.0;
  for (double e : eigenvalues) {
    if (!(e > 0.0)) throw ConfigError("make_quadratic: eigenvalues must be positive");
    max_eig = std::max(max_eig, e);
  }

  auto obj = std::shared_ptr<Objective>(new Objective());
  obj->kind_ = ObjectiveKind::Quadratic;
  obj->dim_ = dim;

  std::size_t dd = static_cast<std::size_t>(dim) * dim;
  std::vector<double> q(dd, 0.0);
  if (rotation_seed == 0) {
    for (int i = 0; i < dim; ++i) q[static_cast<std::size_t>(i) * dim + i] = 1.0;
  } else {
    Rng rng(rotation_seed, 0);
    std::vector<double> gmat(dd);
    for (auto& v : gmat) v = rng.normal();
    householder_qr_q(gmat, dim, q);
  }
  // A = Q^T diag(lambda) Q, i.e. A_ij = sum_k q_ki lambda_k q_kj.
  obj->matrix_.assign(dd, 0.0);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) {
        s += q[static_cast<std::size_t>(k) * dim + i] * eigenvalues[k] *
             q[static_cast<std::size_t>(k) * dim + j];
      }
      obj->matrix_[static_cast<std::size_t>(i) * dim + j] = s;
    }
  }

  obj->constants_.smoothness = max_eig;
  obj->constants_.lipschitz = std::nullopt;
  obj->constants_.f_star = 0.0;
  obj->constants_.x_star = x_star;
  return obj;
}

ObjectivePtr make_logistic_from_data(const std::vector<Vector>& features,
                                     const std::vector<int>& labels) {
  if (features.empty()) throw ConfigError("make_logistic: no samples");
  if (features.size() != labels.size()) {
    throw ConfigError("make_logistic: features/labels size mismatch");
  }
  int dim = static_cast<int>(features.front().size());
  auto obj = std::shared_ptr<Objective>(new Objective());
  obj->kind_ = ObjectiveKind::Logistic;
  obj->dim_ = dim;
  obj->n_samples_ = static_cast<int>(features.size());
  obj->features_.reserve(features.size() * dim);
  double sum_norm_sq = 0.0;
  double max_norm = 0.0;
  for (const auto& f : features) {
    if (static_cast<int>(f.size()) != dim) {
      throw ConfigError("make_logistic: ragged feature rows");
    }
    for (double v : f) obj->features_.push_back(v);
    double ns = norm_sq(f);
    sum_norm_sq += ns;
    max_norm = std::max(max_norm, std::sqrt(ns));
  }
  for (int y : labels) {
    if (y != 1 && y != -1) throw ConfigError("make_logistic: labels must be +-1");
    obj->labels_.push_back(y);
  }
  obj->constants_.smoothness = 0.25 * sum_norm_sq / obj->n_samples_;
  obj->constants_.lipschitz = max_norm;
  obj->constants_.f_star = 0.0;  // valid lower bound; exact for separable data
  obj->constants_.x_star = std::nullopt;
  return obj;
}

ObjectivePtr make_logistic(int dim, int n_samples, std::uint64_t data_seed) {
  if (dim < 1) throw ConfigError("make_logistic: dim must be >= 1");
  if (n_samples < dim) {
    throw ConfigError("make_logistic: n_samples must be >= dim");
  }
  Rng rng(data_seed, 0);
  // Ground-truth unit direction.
  Vector w = rng.normal_vector(dim);
  double wn = norm(w);
  if (wn == 0.0) w[0] = 1.0; else for (auto& v : w) v /= wn;

  const double kRelativeMargin = 0.2;
  std::vector<Vector> feats;
  std::vector<int> labels;
  feats.reserve(n_samples);
  double max_norm = 0.0;
  while (static_cast<int>(feats.size()) < n_samples) {
    Vector a = rng.normal_vector(dim);
    double an = norm(a);
    if (an == 0.0) continue;
    double margin = dot(a, w) / an;
    if (std::fabs(margin) < kRelativeMargin) continue;  // resample: keep a gap
    labels.push_back(margin > 0.0 ? 1 : -1);
    max_norm = std::max(max_norm, an);
    feats.push_back(std::move(a));
  }
  for (auto& a : feats) {
    for (auto& v : a) v /= max_norm;
  }
  return make_logistic_from_data(feats, labels);
}

ObjectivePtr make_smooth_nonconvex(int dim) {
  if (dim < 1) throw ConfigError("make_smooth_nonconvex: dim must be >= 1");
  auto obj = std::shared_ptr<Objective>(new Objective());
  obj->kind_ = ObjectiveKind::SmoothNonconvex;
  obj->dim_ = dim;
  obj->constants_.smoothness = 2.0;
  obj->constants_.lipschitz = std::sqrt(static_cast<double>(dim)) * 3.0 * std::sqrt(3.0) / 8.0;
  obj->constants_.f_star = 0.0;
  obj->constants_.x_star = Vector(dim, 0.0);
  return obj;
}

double check_smoothness_inequality(const Objective& obj, int n_pairs,
                                   std::uint64_t seed) {
  if (n_pairs < 1) throw ConfigError("check_smoothness_inequality: n_pairs must be >= 1");
  Rng rng(seed, 0);
  const double m = obj.constants().smoothness;
  double worst = -std::numeric_limits<double>::infinity();
  Vector x(obj.dim()), y(obj.dim());
  for (int p = 0; p < n_pairs; ++p) {
    for (int i = 0; i < obj.dim(); ++i) x[i] = rng.uniform(-5.0, 5.0);
    for (int i = 0; i < obj.dim(); ++i) y[i] = rng.uniform(-5.0, 5.0);
    Vector gx = obj.grad(x);
    Vector d = sub(y, x);
    double lhs = std::fabs(obj.eval(y) - obj.eval(x) - dot(gx, d));
    double rhs = 0.5 * m * norm_sq(d);
    worst = std::max(worst, (lhs - rhs) / (1.0 + rhs));
  }
  return worst;
}

}  // namespace adastep
