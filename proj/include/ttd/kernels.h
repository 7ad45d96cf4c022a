#pragma once

// Dense numerical kernels. Each kernel has a plain serial reference in
// `ttd::kernels::serial` and an OpenMP implementation in
// `ttd::kernels::parallel`. The library calls the parallel versions; the serial
// ones are kept as test oracles and as the baseline for bench/kernel_bench.
//
// Parallel kernels are bit-deterministic: every output element is produced by
// the same sequence of floating-point operations regardless of thread count.

#include <cstdint>
#include <vector>

#include "ttd/matrix.h"

namespace ttd {

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // ascending
  Matrix eigenvectors;              // column i pairs with eigenvalues[i]; empty if not requested
  int sweeps = 0;
  std::uint64_t rotations = 0;
};

namespace kernels {

inline constexpr double kJacobiRelTolerance = 1e-10;
inline constexpr int kJacobiMaxSweeps = 100;

namespace serial {

// Classical cyclic-by-row Jacobi.
EigenDecomposition jacobi_eig(const SymMatrix& m, bool want_vectors);

// Gram matrix of the row vectors: out(i, j) = <rows_i, rows_j>.
Matrix gram(const Matrix& rows);

Matrix multiply(const Matrix& a, const Matrix& b);

// Solves spd * X = rhs by Cholesky factorization.
Matrix cholesky_solve(const SymMatrix& spd, const Matrix& rhs);

}  // namespace serial

namespace parallel {

// Jacobi with round-robin (tournament) pair ordering: each round applies n/2
// disjoint rotations at once, which are distributed over threads.
EigenDecomposition jacobi_eig(const SymMatrix& m, bool want_vectors);

Matrix gram(const Matrix& rows);

Matrix multiply(const Matrix& a, const Matrix& b);

Matrix cholesky_solve(const SymMatrix& spd, const Matrix& rhs);

}  // namespace parallel

int max_threads();

}  // namespace kernels
}  // namespace ttd
