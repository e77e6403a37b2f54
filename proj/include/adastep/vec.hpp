// Small dense-vector helpers used throughout the library.
//
// All reductions accumulate left-to-right in index order, which pins the
// floating-point result bit-for-bit for a given input within one build.

#ifndef ADASTEP_VEC_HPP
#define ADASTEP_VEC_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace adastep {

using Vector = std::vector<double>;

inline bool is_finite(double x) { return std::isfinite(x); }

inline bool is_finite(const Vector& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

inline double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vector& v) { return dot(v, v); }

inline double norm(const Vector& v) { return std::sqrt(norm_sq(v)); }

/// y += c * x
inline void axpy(double c, const Vector& x, Vector& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline Vector sub(const Vector& a, const Vector& b) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vector scaled(const Vector& v, double c) {
  Vector r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = c * v[i];
  return r;
}

}  // namespace adastep

#endif  // ADASTEP_VEC_HPP
