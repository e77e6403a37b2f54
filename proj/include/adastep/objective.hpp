// Synthetic smooth test objectives with closed-form gradients and
// analytically known constants.

#ifndef ADASTEP_OBJECTIVE_HPP
#define ADASTEP_OBJECTIVE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "adastep/vec.hpp"

namespace adastep {

enum class ObjectiveKind { Quadratic, Logistic, SmoothNonconvex };

std::string to_string(ObjectiveKind kind);

/// Analytic constants attached to an objective.
///   smoothness  - gradient Lipschitz constant (tight where noted in the
///                 factory functions)
///   lipschitz   - function Lipschitz constant; empty means unbounded
///   f_star      - infimum of f
///   x_star      - a minimizer, when one exists at a finite point
struct ObjectiveConstants {
  double smoothness = 0.0;
  std::optional<double> lipschitz;
  double f_star = 0.0;
  std::optional<Vector> x_star;
};

/// Immutable objective; eval/grad are pure and total on finite inputs of the
/// declared dimension. Safe to share across threads.
class Objective {
 public:
  ObjectiveKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const ObjectiveConstants& constants() const { return constants_; }

  double eval(const Vector& x) const;
  Vector grad(const Vector& x) const;

  /// grad without the return-value allocation, for hot loops.
  void grad_into(const Vector& x, Vector& out) const;

  /// Squared distance of x to the minimizer; requires x_star.
  double dist_to_minimizer(const Vector& x) const;

 private:
  Objective() = default;

  ObjectiveKind kind_ = ObjectiveKind::Quadratic;
  int dim_ = 0;
  ObjectiveConstants constants_;

  // Quadratic: f(x) = 1/2 (x - x*)^T A (x - x*), A stored row-major.
  std::vector<double> matrix_;

  // Logistic: features row-major (n x d), labels in {-1, +1}.
  std::vector<double> features_;
  std::vector<int> labels_;
  int n_samples_ = 0;

  void check_input(const Vector& x) const;

  friend std::shared_ptr<const Objective> make_quadratic(
      int dim, const Vector& eigenvalues, const Vector& x_star,
      std::uint64_t rotation_seed);
  friend std::shared_ptr<const Objective> make_logistic_from_data(
      const std::vector<Vector>& features, const std::vector<int>& labels);
  friend std::shared_ptr<const Objective> make_smooth_nonconvex(int dim);
};

using ObjectivePtr = std::shared_ptr<const Objective>;

/// f(x) = 1/2 (x - x*)^T A (x - x*) with A = Q^T diag(eigenvalues) Q and Q
/// the orthogonal factor of a seeded standard-normal matrix (QR with positive
/// diagonal of R, so Q is unique and dim 1 reduces to A = [eigenvalue]).
/// rotation_seed == 0 keeps the eigenbasis axis-aligned (no rotation).
/// constants: smoothness = max eigenvalue (tight), f_star = 0 at x_star,
/// lipschitz unbounded.
ObjectivePtr make_quadratic(int dim, const Vector& eigenvalues,
                            const Vector& x_star, std::uint64_t rotation_seed);

/// Mean logistic loss over explicit data:
///   f(x) = (1/n) sum_i log(1 + exp(-y_i <a_i, x>)).
ObjectivePtr make_logistic_from_data(const std::vector<Vector>& features,
                                     const std::vector<int>& labels);

/// Mean logistic loss over synthetic linearly separable data with relative
/// margin >= 0.2, rescaled so every feature norm is <= 1 (max norm = 1).
///
/// Constants, with s_i = ||a_i||:
///   smoothness = (1/(4n)) sum_i s_i^2   since the Hessian is
///     (1/n) sum_i p_i (1-p_i) a_i a_i^T with p(1-p) <= 1/4, so its largest
///     eigenvalue is at most (1/(4n)) sum_i s_i^2 <= 1/4;
///   lipschitz  = max_i s_i = 1          since |sigmoid| <= 1 gives
///     ||grad f|| <= (1/n) sum_i s_i <= max_i s_i;
///   f_star     = 0 exactly: the data are strictly separable, so the loss
///     tends to 0 along the separating ray and is positive everywhere, i.e.
///     the infimum is 0 and is not attained (x_star empty).
ObjectivePtr make_logistic(int dim, int n_samples, std::uint64_t data_seed);

/// f(x) = sum_i x_i^2 / (1 + x_i^2): smooth, globally Lipschitz, nonconvex,
/// bounded below by 0 with minimizer at 0.
///
/// Scalar kernel phi(u) = u^2/(1+u^2):
///   phi'(u)  = 2u/(1+u^2)^2,  phi''(u) = (2-6u^2)/(1+u^2)^3.
///   phi'' has critical points u = 0, +-1 (phi''' = 0 <=> 24u(u^2-1) = 0),
///   with phi''(0) = 2, phi''(+-1) = -1/2, phi'' -> 0; so max|phi''| = 2.
///   phi' is extremal where phi'' = 0, i.e. u = +-1/sqrt(3), giving
///   max|phi'| = 2(1/sqrt(3))/(4/3)^2 = 3*sqrt(3)/8.
/// The Hessian of f is diag(phi''(x_i)), so smoothness = 2 for every dim.
/// ||grad f(x)||^2 = sum phi'(x_i)^2 <= d * (3*sqrt(3)/8)^2, attained at
/// x = (1/sqrt(3)) * ones, so lipschitz = sqrt(dim) * 3*sqrt(3)/8.
ObjectivePtr make_smooth_nonconvex(int dim);

/// Max over sampled pairs (x, y) from [-5, 5]^d of
///   (|f(y) - f(x) - <grad f(x), y - x>| - (M/2)||y - x||^2) / (1 + rhs),
/// the relative violation of the quadratic-upper-bound inequality implied by
/// M-smoothness. Nonpositive (up to ~1e-9) when constants.smoothness is a
/// valid gradient Lipschitz constant.
double check_smoothness_inequality(const Objective& obj, int n_pairs,
                                   std::uint64_t seed);

}  // namespace adastep

#endif  // ADASTEP_OBJECTIVE_HPP
