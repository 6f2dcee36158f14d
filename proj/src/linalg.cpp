#include "preflearn/linalg.hpp"

#include <cmath>

namespace preflearn {

bool solve_linear_system(std::vector<double> A, Vec b, int dim, Vec& out,
                         double pivot_tol) {
  for (int col = 0; col < dim; ++col) {
    int piv = col;
    double best = std::abs(A[col * dim + col]);
    for (int r = col + 1; r < dim; ++r) {
      const double v = std::abs(A[r * dim + col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < pivot_tol) return false;
    if (piv != col) {
      for (int c = col; c < dim; ++c) std::swap(A[piv * dim + c], A[col * dim + c]);
      std::swap(b[piv], b[col]);
    }
    const double d = A[col * dim + col];
    for (int r = col + 1; r < dim; ++r) {
      const double factor = A[r * dim + col] / d;
      if (factor == 0.0) continue;
      for (int c = col; c < dim; ++c) A[r * dim + c] -= factor * A[col * dim + c];
      b[r] -= factor * b[col];
    }
  }
  out.assign(dim, 0.0);
  for (int r = dim - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < dim; ++c) s -= A[r * dim + c] * out[c];
    out[r] = s / A[r * dim + r];
  }
  return true;
}

}  // namespace preflearn
