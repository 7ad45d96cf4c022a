#include "ttd/numerics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "ttd/error.h"

namespace ttd {

EigenDecomposition sym_eig(const SymMatrix& m, bool want_vectors) {
  return kernels::parallel::jacobi_eig(m, want_vectors);
}

std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::vector<int> mapping;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l >= static_cast<int>(mapping.size())) mapping.resize(static_cast<std::size_t>(l) + 1, -1);
    if (mapping[l] < 0) {
      mapping[l] = static_cast<int>(std::count_if(mapping.begin(), mapping.end(), [](int v) { return v >= 0; }));
    }
    out[i] = mapping[l];
  }
  return out;
}

namespace {

struct Solution {
  std::vector<int> labels;
  double inertia = std::numeric_limits<double>::infinity();
};

double cosine_distance(std::span<const double> unit_row, std::span<const double> centroid) {
  double dot = 0.0;
  double norm = 0.0;
  for (std::size_t j = 0; j < centroid.size(); ++j) {
    dot += unit_row[j] * centroid[j];
    norm += centroid[j] * centroid[j];
  }
  if (norm == 0.0) return 1.0;
  return 1.0 - dot / std::sqrt(norm);
}

double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

Matrix seed_centroids(const Matrix& unit, int k, std::mt19937_64& rng) {
  const std::size_t n = unit.rows();
  Matrix centroids(static_cast<std::size_t>(k), unit.cols());
  std::vector<bool> chosen(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

  auto take = [&](std::size_t idx, std::size_t slot) {
    chosen[idx] = true;
    std::copy(unit.row(idx).begin(), unit.row(idx).end(), centroids.row(slot).begin());
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], std::max(0.0, cosine_distance(unit.row(i), centroids.row(slot))));
    }
  };

  take(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n, 0);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!chosen[i]) total += nearest[i] * nearest[i];
    std::size_t pick = n;
    if (total > 0.0) {
      double target = uniform01(rng) * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        target -= nearest[i] * nearest[i];
        pick = i;
        if (target < 0.0) break;
      }
    } else {
      // Every remaining point duplicates a centroid: choose uniformly among them.
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) rest.push_back(i);
      pick = rest[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(rest.size())) % rest.size()];
    }
    take(pick, static_cast<std::size_t>(c));
  }
  return centroids;
}

Solution lloyd(const Matrix& unit, Matrix centroids, int max_iterations) {
  const std::size_t n = unit.rows();
  const std::size_t dim = unit.cols();
  const int k = static_cast<int>(centroids.rows());
  Solution s;
  s.labels.assign(n, -1);
  std::vector<double> dist(n, 0.0);

  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = cosine_distance(unit.row(i), centroids.row(static_cast<std::size_t>(c)));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      dist[i] = best_d;
      if (s.labels[i] != best) {
        s.labels[i] = best;
        changed = true;
      }
    }

    // Empty-cluster repair: move the point farthest from its centroid, taken
    // from a cluster that keeps at least one member.
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int l : s.labels) ++sizes[l];
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[s.labels[i]] < 2) continue;
        if (far == n || dist[i] > dist[far]) far = i;
      }
      --sizes[s.labels[far]];
      s.labels[far] = c;
      ++sizes[c];
      dist[far] = 0.0;
      changed = true;
    }

    if (!changed && iter > 0) break;

    std::fill(centroids.values().begin(), centroids.values().end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto ci = centroids.row(static_cast<std::size_t>(s.labels[i]));
      auto ui = unit.row(i);
      for (std::size_t j = 0; j < dim; ++j) ci[j] += ui[j];
    }
    for (int c = 0; c < k; ++c) {
      auto cc = centroids.row(static_cast<std::size_t>(c));
      for (double& v : cc) v /= sizes[c];
    }
  }

  s.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s.inertia += cosine_distance(unit.row(i), centroids.row(static_cast<std::size_t>(s.labels[i])));
  }
  return s;
}

}  // namespace

std::vector<int> kmeans_cosine(const Matrix& rows, int k, RngSeed seed, const KMeansOptions& options) {
  const std::size_t n = rows.rows();
  if (n == 0) throw Error(ErrorKind::InvalidInput, "kmeans: no rows");
  if (k < 1) throw Error(ErrorKind::InvalidParameter, "kmeans: k must be positive");
  if (static_cast<std::size_t>(k) > n) {
    throw Error(ErrorKind::TooManyClusters, "kmeans: k=" + std::to_string(k) + " > N=" + std::to_string(n));
  }

  Matrix unit = rows;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = unit.row(i);
    double norm = 0.0;
    for (double v : r) norm += v * v;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorKind::DegenerateInput, "kmeans: zero or non-finite row " + std::to_string(i));
    }
    for (double& v : r) v /= norm;
  }

  if (k == 1) return std::vector<int>(n, 0);

  std::mt19937_64 rng(seed.value);
  Solution best;
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    Solution s = lloyd(unit, seed_centroids(unit, k, rng), options.max_iterations);
    if (s.inertia < best.inertia) best = std::move(s);
  }
  return canonical_labels(best.labels);
}

}  // namespace ttd
