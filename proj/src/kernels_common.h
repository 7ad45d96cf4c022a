#pragma once

// Pieces shared by the serial and parallel kernels. Both variants must run the
// exact same per-element arithmetic so their results can be compared bitwise
// where the algorithms coincide.

#include <cmath>
#include <cstddef>
#include <span>

#include "ttd/kernels.h"
#include "ttd/matrix.h"

namespace ttd::kernels::detail {

struct Rotation {
  double c = 1.0;
  double s = 0.0;
  double t = 0.0;
};

// Rotation annihilating a_pq (numerically stable small-angle form).
inline Rotation make_rotation(double app, double aqq, double apq) {
  const double theta = (aqq - app) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  return {c, t * c, t};
}

inline void rotate_rows(std::span<double> p, std::span<double> q, double c, double s) {
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double vp = p[j];
    const double vq = q[j];
    p[j] = c * vp - s * vq;
    q[j] = s * vp + c * vq;
  }
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  double sum = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) sum += x[k] * y[k];
  return sum;
}

// Entries this small relative to ||M||_F are left alone; their total
// contribution stays far below the convergence tolerance.
inline double rotation_skip_threshold(double norm, std::size_t n) {
  return 1e-3 * kJacobiRelTolerance * norm / static_cast<double>(n == 0 ? 1 : n);
}

double off_diagonal_norm(const Matrix& a);

// Sorts eigenpairs ascending and normalizes eigenvector columns.
void finish_decomposition(const Matrix& a, Matrix vt, bool want_vectors, EigenDecomposition& out);

void multiply_row(const Matrix& a, const Matrix& b, std::size_t i, std::span<double> out);

Matrix cholesky_factor(const SymMatrix& spd);

// In-place forward/back substitution L L^T X = B for columns [col_begin, col_end).
void cholesky_substitute(const Matrix& l, Matrix& x, std::size_t col_begin, std::size_t col_end);

}  // namespace ttd::kernels::detail
