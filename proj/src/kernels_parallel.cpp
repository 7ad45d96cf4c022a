#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kernels_common.h"
#include "ttd/error.h"
#include "ttd/kernels.h"

namespace ttd::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

// Below this order the fork/join overhead outweighs the work per round.
constexpr std::size_t kParallelMinOrder = 128;

struct PairRotation {
  std::size_t p;
  std::size_t q;
  double app;
  double aqq;
  double apq;
  detail::Rotation rot;
};

}  // namespace

namespace parallel {

EigenDecomposition jacobi_eig(const SymMatrix& m, bool want_vectors) {
  const std::size_t n = m.order();
  Matrix a = m.matrix();
  Matrix vt = want_vectors ? Matrix::identity(n) : Matrix();

  const double norm = frobenius_norm(a);
  const double tolerance = kJacobiRelTolerance * norm;
  const double skip = detail::rotation_skip_threshold(norm, n);
  const bool threaded = n >= kParallelMinOrder;

  // Tournament schedule over an even number of slots; slot n (odd n) is a bye.
  const std::size_t slots = n + (n % 2);
  std::vector<std::size_t> players(slots);
  std::iota(players.begin(), players.end(), std::size_t{0});
  std::vector<PairRotation> active;
  active.reserve(slots / 2);

  EigenDecomposition out;
  while (n > 1 && norm > 0.0 && detail::off_diagonal_norm(a) >= tolerance) {
    if (out.sweeps == kJacobiMaxSweeps) {
      throw Error(ErrorKind::NonConvergence,
                  "jacobi: off-diagonal norm " + std::to_string(detail::off_diagonal_norm(a)) +
                      " after " + std::to_string(out.sweeps) + " sweeps");
    }
    for (std::size_t round = 0; round + 1 < slots; ++round) {
      active.clear();
      for (std::size_t i = 0; i < slots / 2; ++i) {
        std::size_t p = players[i];
        std::size_t q = players[slots - 1 - i];
        if (p > q) std::swap(p, q);
        if (q >= n) continue;
        const double apq = a(p, q);
        if (std::abs(apq) <= skip) continue;
        active.push_back({p, q, a(p, p), a(q, q), apq, detail::make_rotation(a(p, p), a(q, q), apq)});
      }
      const auto count = static_cast<std::ptrdiff_t>(active.size());

      // A <- P^T A: rows p, q of each pair.
#pragma omp parallel for schedule(static) if (threaded)
      for (std::ptrdiff_t k = 0; k < count; ++k) {
        const PairRotation& r = active[k];
        detail::rotate_rows(a.row(r.p), a.row(r.q), r.rot.c, r.rot.s);
        if (want_vectors) detail::rotate_rows(vt.row(r.p), vt.row(r.q), r.rot.c, r.rot.s);
      }

      // A <- A P: columns p, q of each pair, walked row by row.
#pragma omp parallel for schedule(static) if (threaded)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        auto row = a.row(static_cast<std::size_t>(i));
        for (const PairRotation& r : active) {
          const double vp = row[r.p];
          const double vq = row[r.q];
          row[r.p] = r.rot.c * vp - r.rot.s * vq;
          row[r.q] = r.rot.s * vp + r.rot.c * vq;
        }
      }

      for (const PairRotation& r : active) {
        a(r.p, r.p) = r.app - r.rot.t * r.apq;
        a(r.q, r.q) = r.aqq + r.rot.t * r.apq;
        a(r.p, r.q) = 0.0;
        a(r.q, r.p) = 0.0;
      }
      out.rotations += active.size();

      std::rotate(players.begin() + 1, players.end() - 1, players.end());
    }
    ++out.sweeps;
  }
  detail::finish_decomposition(a, std::move(vt), want_vectors, out);
  return out;
}

Matrix gram(const Matrix& rows) {
  const std::size_t n = rows.rows();
  Matrix g(n, n);
#pragma omp parallel for schedule(dynamic, 8) if (n >= kParallelMinOrder)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
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
#pragma omp parallel for schedule(static) if (a.rows() >= kParallelMinOrder)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(a.rows()); ++i) {
    detail::multiply_row(a, b, static_cast<std::size_t>(i), c.row(static_cast<std::size_t>(i)));
  }
  return c;
}

Matrix cholesky_solve(const SymMatrix& spd, const Matrix& rhs) {
  const Matrix l = detail::cholesky_factor(spd);
  Matrix x = rhs;
  constexpr std::size_t kBlock = 64;
  const std::size_t blocks = (x.cols() + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(static) if (spd.order() >= kParallelMinOrder)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
    detail::cholesky_substitute(l, x, begin, std::min(begin + kBlock, x.cols()));
  }
  return x;
}

}  // namespace parallel
}  // namespace ttd::kernels
