#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "ttd/affinity.h"
#include "ttd/matrix.h"

namespace ttd::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = u(rng);
  return m;
}

inline SymMatrix random_symmetric(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  return SymMatrix::average_of(random_matrix(n, n, rng, lo, hi));
}

inline std::vector<Embedding> random_embeddings(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Embedding> out(n, Embedding(dim));
  for (auto& e : out)
    for (double& v : e) v = g(rng);
  return out;
}

// Embeddings drawn around `speakers` random directions; returns the true labels.
inline std::vector<Embedding> clustered_embeddings(const std::vector<int>& labels, int speakers, std::size_t dim,
                                                   double noise, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Embedding> centers(static_cast<std::size_t>(speakers), Embedding(dim));
  for (auto& c : centers)
    for (double& v : c) v = g(rng);
  std::vector<Embedding> out;
  for (int l : labels) {
    Embedding e = centers[static_cast<std::size_t>(l)];
    for (double& v : e) v += noise * g(rng);
    out.push_back(std::move(e));
  }
  return out;
}

// True when the two labelings describe the same partition.
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab;
  std::map<int, int> ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [x, fresh_x] = ab.emplace(a[i], b[i]);
    auto [y, fresh_y] = ba.emplace(b[i], a[i]);
    if (x->second != b[i] || y->second != a[i]) return false;
  }
  return true;
}

inline Matrix block_affinity(const std::vector<std::size_t>& sizes, double intra, double inter) {
  std::size_t n = 0;
  for (auto s : sizes) n += s;
  std::vector<std::size_t> block;
  for (std::size_t b = 0; b < sizes.size(); ++b) block.insert(block.end(), sizes[b], b);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = block[i] == block[j] ? intra : inter;
  return a;
}

}  // namespace ttd::testing
