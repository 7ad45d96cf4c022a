#include "kernels_common.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "ttd/error.h"

namespace ttd::kernels::detail {

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) sum += a(i, j) * a(i, j);
  return std::sqrt(sum);
}

void finish_decomposition(const Matrix& a, Matrix vt, bool want_vectors, EigenDecomposition& out) {
  const std::size_t n = a.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  out.eigenvalues.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.eigenvalues[k] = a(order[k], order[k]);
  if (!want_vectors) return;

  out.eigenvectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    auto v = vt.row(order[k]);
    const double norm = std::sqrt(dot(v, v));
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v[i] / norm;
  }
}

void multiply_row(const Matrix& a, const Matrix& b, std::size_t i, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double aik = a(i, k);
    if (aik == 0.0) continue;
    auto bk = b.row(k);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += aik * bk[j];
  }
}

Matrix cholesky_factor(const SymMatrix& spd) {
  const std::size_t n = spd.order();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = spd(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) {
      throw Error(ErrorKind::SolveFailure,
                  "cholesky: matrix not positive definite at pivot " + std::to_string(j));
    }
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = spd(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  return l;
}

void cholesky_substitute(const Matrix& l, Matrix& x, std::size_t col_begin, std::size_t col_end) {
  const std::size_t n = l.rows();
  // L y = b
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = x.row(i);
    for (std::size_t k = 0; k < i; ++k) {
      const double lik = l(i, k);
      auto xk = x.row(k);
      for (std::size_t j = col_begin; j < col_end; ++j) xi[j] -= lik * xk[j];
    }
    const double lii = l(i, i);
    for (std::size_t j = col_begin; j < col_end; ++j) xi[j] /= lii;
  }
  // L^T x = y
  for (std::size_t ii = n; ii-- > 0;) {
    auto xi = x.row(ii);
    for (std::size_t k = ii + 1; k < n; ++k) {
      const double lki = l(k, ii);
      auto xk = x.row(k);
      for (std::size_t j = col_begin; j < col_end; ++j) xi[j] -= lki * xk[j];
    }
    const double lii = l(ii, ii);
    for (std::size_t j = col_begin; j < col_end; ++j) xi[j] /= lii;
  }
}

}  // namespace ttd::kernels::detail
