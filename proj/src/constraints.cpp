#include "ttd/constraints.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "ttd/error.h"
#include "ttd/kernels.h"

namespace ttd {

ConstraintMatrix::ConstraintMatrix(SymMatrix values) : values_(std::move(values)) {
  const std::size_t n = values_.order();
  for (std::size_t i = 0; i < n; ++i) {
    if (values_(i, i) < 0.0) {
      throw Error(ErrorKind::InvalidMatrix, "constraint diagonal negative at " + std::to_string(i));
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double v = values_(i, j);
      if (v < -1.0 || v > 1.0) {
        throw Error(ErrorKind::InvalidMatrix,
                    "constraint entry out of [-1, 1] at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
}

ConstraintMatrix ConstraintMatrix::clamped(const Matrix& values) {
  Matrix m = values;
  for (double& v : m.values()) v = std::clamp(v, -1.0, 1.0);
  for (std::size_t i = 0; i < m.rows() && i < m.cols(); ++i) m(i, i) = std::max(m(i, i), 0.0);
  return ConstraintMatrix(SymMatrix(std::move(m)));
}

ConstraintMatrix ConstraintMatrix::zeros(std::size_t n) { return ConstraintMatrix(SymMatrix(Matrix(n, n))); }

ConstraintMatrix build_constraints(std::size_t num_segments, const std::vector<SegmentAdjacency>& adjacency,
                                   double sigma) {
  Matrix q = Matrix::identity(num_segments);
  for (const SegmentAdjacency& adj : adjacency) {
    if (adj.index + 1 >= num_segments) {
      throw Error(ErrorKind::IndexError, "adjacency pair (" + std::to_string(adj.index) + "," +
                                             std::to_string(adj.index + 1) + ") outside " +
                                             std::to_string(num_segments) + " segments");
    }
    if (!(adj.confidence >= 0.0 && adj.confidence <= 1.0)) {
      throw Error(ErrorKind::RangeError, "turn confidence outside [0, 1] at pair " + std::to_string(adj.index));
    }
    double v = 1.0;
    if (adj.has_turn) v = adj.confidence > sigma ? -1.0 : 0.0;
    q(adj.index, adj.index + 1) = v;
    q(adj.index + 1, adj.index) = v;
  }
  return ConstraintMatrix(SymMatrix(std::move(q)));
}

SymMatrix symmetric_normalize(const SymMatrix& a) {
  const std::size_t n = a.order();
  std::vector<double> degree(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (double v : a.row(i)) d += v;
    if (!(d > 0.0)) throw Error(ErrorKind::DegenerateGraph, "row " + std::to_string(i) + " has zero degree");
    degree[i] = d;
  }
  // d_i * d_j is commutative, so the result stays exactly symmetric.
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = a(i, j) / std::sqrt(degree[i] * degree[j]);
  return SymMatrix(std::move(out));
}

namespace {

void check_alpha(double alpha, bool allow_zero) {
  const bool ok = allow_zero ? (alpha >= 0.0 && alpha < 1.0) : (alpha > 0.0 && alpha < 1.0);
  if (!ok) throw Error(ErrorKind::InvalidParameter, "propagation alpha must lie in (0, 1)");
}

void check_orders(const ConstraintMatrix& z, const SymMatrix& a_bar) {
  if (z.order() != a_bar.order()) {
    throw Error(ErrorKind::DimensionError, "constraint order " + std::to_string(z.order()) +
                                               " != affinity order " + std::to_string(a_bar.order()));
  }
}

// max |lhs * x - rhs|
double residual(const SymMatrix& lhs, const Matrix& x, const Matrix& rhs) {
  return max_abs_diff(kernels::parallel::multiply(lhs.matrix(), x), rhs);
}

}  // namespace

ConstraintMatrix e2cp_closed_form(const ConstraintMatrix& z, const SymMatrix& a_bar, double alpha) {
  check_alpha(alpha, true);
  check_orders(z, a_bar);
  const std::size_t n = z.order();

  Matrix m = Matrix::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) -= alpha * a_bar(i, j);
  const SymMatrix system(std::move(m));

  constexpr double kMaxResidual = 1e-6;
  // Y = M^{-1} Z, then Q = Y M^{-1} = (M^{-1} Y^T)^T.
  const Matrix y = kernels::parallel::cholesky_solve(system, z.values().matrix());
  if (double r = residual(system, y, z.values().matrix()); r > kMaxResidual) {
    throw Error(ErrorKind::SolveFailure, "first solve residual " + std::to_string(r));
  }
  const Matrix yt = transpose(y);
  const Matrix w = kernels::parallel::cholesky_solve(system, yt);
  if (double r = residual(system, w, yt); r > kMaxResidual) {
    throw Error(ErrorKind::SolveFailure, "second solve residual " + std::to_string(r));
  }

  const double scale = (1.0 - alpha) * (1.0 - alpha);
  Matrix q(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q(i, j) = scale * 0.5 * (w(j, i) + w(i, j));
  return ConstraintMatrix::clamped(q);
}

ConstraintMatrix e2cp_iterative(const ConstraintMatrix& z, const SymMatrix& a_bar, const PropagationConfig& cfg,
                                PropagationStats* stats) {
  check_alpha(cfg.alpha, false);
  check_orders(z, a_bar);
  const double alpha = cfg.alpha;
  const Matrix& zm = z.values().matrix();
  const Matrix& am = a_bar.matrix();

  // Iterates `step` from `start` until the update falls below tolerance.
  auto converge = [&](Matrix current, auto step, const char* what) {
    double delta = 0.0;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
      Matrix next = step(current);
      delta = max_abs_diff(next, current);
      current = std::move(next);
      if (delta < cfg.iter_tolerance) return std::pair{std::move(current), it};
    }
    char residual[32];
    std::snprintf(residual, sizeof residual, "%.3g", delta);
    throw Error(ErrorKind::NonConvergence, std::string(what) + " propagation did not converge within " +
                                               std::to_string(cfg.max_iterations) + " iterations (last update " +
                                               residual + ")");
  };

  auto [q_v, v_iters] = converge(
      zm,
      [&](const Matrix& q) {
        Matrix next = kernels::parallel::multiply(am, q);
        auto nv = next.values();
        auto zv = zm.values();
        for (std::size_t k = 0; k < nv.size(); ++k) nv[k] = alpha * nv[k] + (1.0 - alpha) * zv[k];
        return next;
      },
      "vertical");

  auto [q_h, h_iters] = converge(
      q_v,
      [&](const Matrix& q) {
        Matrix next = kernels::parallel::multiply(q, am);
        auto nv = next.values();
        auto sv = q_v.values();
        for (std::size_t k = 0; k < nv.size(); ++k) nv[k] = alpha * nv[k] + (1.0 - alpha) * sv[k];
        return next;
      },
      "horizontal");

  if (stats != nullptr) *stats = {v_iters, h_iters};

  const std::size_t n = q_h.rows();
  Matrix sym(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sym(i, j) = 0.5 * (q_h(i, j) + q_h(j, i));
  return ConstraintMatrix::clamped(sym);
}

SymMatrix adjust_affinity(const SymMatrix& a, const ConstraintMatrix& q_star) {
  if (a.order() != q_star.order()) {
    throw Error(ErrorKind::DimensionError, "affinity order " + std::to_string(a.order()) +
                                               " != constraint order " + std::to_string(q_star.order()));
  }
  const std::size_t n = a.order();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double q = q_star(i, j);
      const double v = a(i, j);
      // v + q(1 - v) equals 1 - (1 - q)(1 - v) and is exact at q = 0 and q = 1.
      out(i, j) = q >= 0.0 ? v + q * (1.0 - v) : (1.0 + q) * v;
    }
  }
  return SymMatrix(std::move(out));
}

}  // namespace ttd
