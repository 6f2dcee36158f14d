#pragma once

// Small dense-vector helpers used throughout the library. Problem sizes are
// desk scale (n <= 50, m <= 10), so plain std::vector<double> is sufficient.

#include <cmath>
#include <cstddef>
#include <vector>

namespace preflearn {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l2_norm_sq(const Vec& a) { return dot(a, a); }

inline double l2_norm(const Vec& a) { return std::sqrt(l2_norm_sq(a)); }

inline double linf_norm(const Vec& a) {
  double s = 0.0;
  for (double x : a) s = std::max(s, std::abs(x));
  return s;
}

inline double l2_dist_sq(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scaled(const Vec& a, double c) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

inline bool all_finite(const Vec& a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

// Solves A z = b in place with partial pivoting. A is row-major dim x dim.
// Returns false when the system is numerically singular.
bool solve_linear_system(std::vector<double> A, Vec b, int dim, Vec& out,
                         double pivot_tol = 1e-12);

}  // namespace preflearn
