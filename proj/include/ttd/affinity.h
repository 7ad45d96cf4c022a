#pragma once

#include <vector>

#include "ttd/matrix.h"

namespace ttd {

using Embedding = std::vector<double>;

struct RefinementConfig {
  double p_percentile = 0.95;
  double soft_multiplier = 0.01;
  double blur_sigma = 0.0;  // 0 disables; only meaningful for window-wise dense embeddings
};

// a_ij = (1 + cos(x_i, x_j)) / 2, diagonal exactly 1.
SymMatrix cosine_affinity(const std::vector<Embedding>& embeddings);

// 2-D Gaussian smoothing with reflect padding; sigma == 0 returns the input.
SymMatrix gaussian_blur(const SymMatrix& a, double sigma);

// 0-based index ceil(p*n)-1 of the nearest-rank p-quantile, clamped to [0, n).
std::size_t nearest_rank_index(double p, std::size_t n);

// Nearest-rank p-quantile of `values`.
double nearest_rank_quantile(std::vector<double> values, double p);

// Row-wise soft thresholding. Entries above the row's nearest-rank p-quantile
// become 1 and the rest are scaled by `soft_multiplier`. Entries tied with the
// first order statistic above the quantile all count as above it, so a block of
// equal top values is never split (a constant row binarizes entirely).
Matrix row_threshold(const SymMatrix& a, double p, double soft_multiplier = 0.01);

// (a + a^T) / 2
SymMatrix symmetrize(const Matrix& a);

// Full refinement chain: [blur] -> row_threshold -> symmetrize, diagonal re-pinned to 1.
SymMatrix refine(const SymMatrix& a, const RefinementConfig& cfg);

}  // namespace ttd
