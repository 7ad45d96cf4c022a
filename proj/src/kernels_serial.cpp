#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kernels_common.h"
#include "ttd/error.h"
#include "ttd/kernels.h"

namespace ttd::kernels::serial {

EigenDecomposition jacobi_eig(const SymMatrix& m, bool want_vectors) {
  const std::size_t n = m.order();
  Matrix a = m.matrix();
  Matrix vt = want_vectors ? Matrix::identity(n) : Matrix();

  const double norm = frobenius_norm(a);
  const double tolerance = kJacobiRelTolerance * norm;
  const double skip = detail::rotation_skip_threshold(norm, n);

  EigenDecomposition out;
  while (detail::off_diagonal_norm(a) >= tolerance && norm > 0.0) {
    if (out.sweeps == kJacobiMaxSweeps) {
      throw Error(ErrorKind::NonConvergence,
                  "jacobi: off-diagonal norm " + std::to_string(detail::off_diagonal_norm(a)) +
                      " after " + std::to_string(out.sweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= skip) continue;
        const detail::Rotation r = detail::make_rotation(a(p, p), a(q, q), apq);
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = a(p, k) = r.c * akp - r.s * akq;
          a(k, q) = a(q, k) = r.s * akp + r.c * akq;
        }
        a(p, p) -= r.t * apq;
        a(q, q) += r.t * apq;
        a(p, q) = a(q, p) = 0.0;
        if (want_vectors) detail::rotate_rows(vt.row(p), vt.row(q), r.c, r.s);
        ++out.rotations;
      }
    }
    ++out.sweeps;
  }
  detail::finish_decomposition(a, std::move(vt), want_vectors, out);
  return out;
}

Matrix gram(const Matrix& rows) {
  const std::size_t n = rows.rows();
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double d = detail::dot(rows.row(i), rows.row(j));
      g(i, j) = d;
      g(j, i) = d;
    }
  }
  return g;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorKind::DimensionError, "multiply: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) detail::multiply_row(a, b, i, c.row(i));
  return c;
}

Matrix cholesky_solve(const SymMatrix& spd, const Matrix& rhs) {
  const Matrix l = detail::cholesky_factor(spd);
  Matrix x = rhs;
  detail::cholesky_substitute(l, x, 0, x.cols());
  return x;
}

}  // namespace ttd::kernels::serial
