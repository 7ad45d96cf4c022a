#pragma once

#include <cstddef>
#include <vector>

#include "ttd/matrix.h"

namespace ttd {

// Symmetric pairwise-constraint matrix with entries in [-1, 1] and a
// non-negative diagonal. Positive entries are must-link evidence, negative
// entries cannot-link evidence.
class ConstraintMatrix {
 public:
  ConstraintMatrix() = default;
  explicit ConstraintMatrix(SymMatrix values);

  // Clamps every entry into [-1, 1] before validating.
  static ConstraintMatrix clamped(const Matrix& values);
  static ConstraintMatrix zeros(std::size_t n);

  std::size_t order() const noexcept { return values_.order(); }
  double operator()(std::size_t i, std::size_t j) const { return values_(i, j); }
  const SymMatrix& values() const noexcept { return values_; }

  bool operator==(const ConstraintMatrix&) const = default;

 private:
  SymMatrix values_;
};

// Relation between segment `index` and segment `index + 1`.
struct SegmentAdjacency {
  std::size_t index = 0;
  bool has_turn = false;
  double confidence = 0.0;
};

struct PropagationConfig {
  double alpha = 0.4;
  double sigma_threshold = 0.5;
  double iter_tolerance = 1e-9;
  int max_iterations = 10000;
};

// -1 across a speaker turn whose confidence exceeds sigma, +1 between segments
// without a turn, 0 elsewhere; diagonal +1.
ConstraintMatrix build_constraints(std::size_t num_segments, const std::vector<SegmentAdjacency>& adjacency,
                                   double sigma);

// D^{-1/2} A D^{-1/2}
SymMatrix symmetric_normalize(const SymMatrix& a);

// Q* = (1 - alpha)^2 (I - alpha*Abar)^{-1} Z (I - alpha*Abar)^{-1}, clamped to [-1, 1].
// alpha == 0 is accepted and returns Z.
ConstraintMatrix e2cp_closed_form(const ConstraintMatrix& z, const SymMatrix& a_bar, double alpha);

struct PropagationStats {
  int vertical_iterations = 0;
  int horizontal_iterations = 0;
};

// Vertical propagation Q_v <- alpha*Abar*Q_v + (1-alpha)*Z to convergence, then
// horizontal propagation Q_h <- alpha*Q_h*Abar + (1-alpha)*Q_v*. Converged when the
// max-abs update drops below cfg.iter_tolerance.
ConstraintMatrix e2cp_iterative(const ConstraintMatrix& z, const SymMatrix& a_bar, const PropagationConfig& cfg,
                                PropagationStats* stats = nullptr);

// Adjusted affinity: 1 - (1 - q)(1 - a) for q >= 0, (1 + q) a for q < 0.
SymMatrix adjust_affinity(const SymMatrix& a, const ConstraintMatrix& q_star);

}  // namespace ttd
