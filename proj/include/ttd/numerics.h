#pragma once

#include <cstdint>
#include <vector>

#include "ttd/kernels.h"
#include "ttd/matrix.h"

namespace ttd {

struct RngSeed {
  std::uint64_t value = 0;
};

// Symmetric eigendecomposition, eigenvalues ascending. Deterministic for
// identical input bits.
EigenDecomposition sym_eig(const SymMatrix& m, bool want_vectors = true);

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 300;
};

// Spherical k-means with distance 1 - cos(x, c). Seeding is k-means++ driven by
// `seed`; the restart with the lowest inertia wins. Labels are canonical: clusters
// are numbered in order of first appearance along the rows.
std::vector<int> kmeans_cosine(const Matrix& rows, int k, RngSeed seed, const KMeansOptions& options = {});

// Renumbers labels in order of first appearance.
std::vector<int> canonical_labels(const std::vector<int>& labels);

}  // namespace ttd
