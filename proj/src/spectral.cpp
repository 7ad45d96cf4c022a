#include "ttd/spectral.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ttd/error.h"

namespace ttd {

std::vector<double> PercentileGrid::values() const {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidParameter, "p grid step must be positive");
  std::vector<double> out;
  // Integer stepping avoids accumulated drift (0.40 + 11 * 0.05 must land on 0.95).
  const auto count = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) out.push_back(start + step * i);
  return out;
}

void ClustererConfig::validate() const {
  if (min_speakers < 1 || max_speakers < min_speakers) {
    throw Error(ErrorKind::InvalidParameter, "need 1 <= min_speakers <= max_speakers");
  }
  if (!(p_percentile > 0.0 && p_percentile < 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "p_percentile must lie in (0, 1)");
  }
  if (use_autotune) {
    const auto grid = p_grid.values();
    if (grid.empty() || !(grid.front() > 0.0) || !(grid.back() < 1.0)) {
      throw Error(ErrorKind::InvalidParameter, "p grid must be non-empty and within (0, 1)");
    }
  }
  if (!(propagation.alpha > 0.0 && propagation.alpha < 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "alpha must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidParameter, "epsilon must be positive");
  if (blur_sigma < 0.0) throw Error(ErrorKind::InvalidParameter, "blur_sigma must be >= 0");
}

SymMatrix laplacian(const SymMatrix& a, bool normalized) {
  const std::size_t n = a.order();
  std::vector<double> degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (double v : a.row(i)) degree[i] += v;

  Matrix l(n, n);
  if (!normalized) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) l(i, j) = (i == j ? degree[i] : 0.0) - a(i, j);
    return SymMatrix(std::move(l));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(degree[i] > 0.0)) throw Error(ErrorKind::DegenerateGraph, "node " + std::to_string(i) + " has zero degree");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double num = (i == j ? degree[i] : 0.0) - a(i, j);
      l(i, j) = num / std::sqrt(degree[i] * degree[j]);
    }
  }
  return SymMatrix(std::move(l));
}

SpeakerCount count_speakers(const std::vector<double>& eigenvalues, int min_k, int max_k, double epsilon,
                            double single_speaker_gap) {
  if (min_k < 1 || max_k < min_k) throw Error(ErrorKind::InvalidInput, "need 1 <= min_k <= max_k");
  if (eigenvalues.size() < static_cast<std::size_t>(max_k) + 1) {
    throw Error(ErrorKind::InvalidInput, "need at least max_k + 1 = " + std::to_string(max_k + 1) +
                                             " eigenvalues, got " + std::to_string(eigenvalues.size()));
  }
  auto ratio = [&](int k) { return eigenvalues[k] / (eigenvalues[k - 1] + epsilon); };

  SpeakerCount best;
  best.k = 0;
  for (int k = std::max(min_k, 2); k <= max_k; ++k) {
    const double g = ratio(k);
    if (best.k == 0 || g > best.max_gap) best = {k, g};
  }
  if (best.k == 0) return {1, ratio(1)};
  if (min_k <= 1 && best.max_gap < single_speaker_gap) best.k = 1;
  return best;
}

int estimate_k(const std::vector<double>& eigenvalues, int min_k, int max_k, double epsilon) {
  return count_speakers(eigenvalues, min_k, max_k, epsilon, 0.0).k;
}

SpectralEmbedding spectral_embed(const EigenDecomposition& eig, int k) {
  const std::size_t n = eig.eigenvalues.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorKind::InvalidInput, "spectral_embed: k=" + std::to_string(k) + " outside [1, " +
                                             std::to_string(n) + "]");
  }
  if (eig.eigenvectors.rows() != n) throw Error(ErrorKind::InvalidInput, "decomposition has no eigenvectors");
  SpectralEmbedding out{Matrix(n, static_cast<std::size_t>(k)), {}};
  for (std::size_t i = 0; i < n; ++i) {
    auto row = out.rows.row(i);
    double norm = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] = eig.eigenvectors(i, c);
      norm += row[c] * row[c];
    }
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double& v : row) v /= norm;
    } else {
      out.zero_rows.push_back(i);
    }
  }
  return out;
}

SpectralEmbedding spectral_embed(const SymMatrix& l, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > l.order()) {
    throw Error(ErrorKind::InvalidInput, "spectral_embed: k=" + std::to_string(k) + " outside [1, " +
                                             std::to_string(l.order()) + "]");
  }
  return spectral_embed(sym_eig(l, true), k);
}

SymMatrix constrained_affinity(const std::vector<Embedding>& embeddings,
                               const std::optional<ConstraintMatrix>& constraints, const ClustererConfig& cfg) {
  SymMatrix a = cosine_affinity(embeddings);
  if (!cfg.use_constraints || !constraints.has_value()) return a;
  if (constraints->order() != a.order()) {
    throw Error(ErrorKind::DimensionError, "constraint order " + std::to_string(constraints->order()) +
                                               " != number of embeddings " + std::to_string(a.order()));
  }
  const SymMatrix a_bar = symmetric_normalize(a);
  const ConstraintMatrix q_star = e2cp_closed_form(*constraints, a_bar, cfg.propagation.alpha);
  return adjust_affinity(a, q_star);
}

namespace {

struct GridPoint {
  double p = 0.0;
  EigenDecomposition eig;
  SpeakerCount count;
  double ratio = 0.0;
};

GridPoint evaluate(const SymMatrix& affinity, double p, const ClustererConfig& cfg) {
  RefinementConfig refinement;
  refinement.p_percentile = p;
  refinement.blur_sigma = cfg.blur_sigma;
  const SymMatrix refined = refine(affinity, refinement);
  const SymMatrix l = laplacian(refined, cfg.laplacian == LaplacianType::Normalized);

  GridPoint gp;
  gp.p = p;
  gp.eig = sym_eig(l, true);
  const int n = static_cast<int>(affinity.order());
  const int max_k = std::min(cfg.max_speakers, n - 1);
  const int min_k = std::min(cfg.min_speakers, max_k);
  gp.count = count_speakers(gp.eig.eigenvalues, min_k, max_k, cfg.epsilon, cfg.single_speaker_gap);
  gp.ratio = std::sqrt(1.0 - p) / gp.count.max_gap;
  return gp;
}

ClusterResult finish(GridPoint gp, const ClustererConfig& cfg, int decompositions) {
  ClusterResult r;
  r.num_speakers = gp.count.k;
  r.chosen_p = gp.p;
  r.ratio = gp.ratio;
  r.max_gap = gp.count.max_gap;
  r.decompositions = decompositions;
  const std::size_t n = gp.eig.eigenvalues.size();
  if (gp.count.k == 1) {
    r.labels.assign(n, 0);
  } else {
    const SpectralEmbedding emb = spectral_embed(gp.eig, gp.count.k);
    if (!emb.zero_rows.empty()) {
      throw Error(ErrorKind::DegenerateInput,
                  "spectral embedding row " + std::to_string(emb.zero_rows.front()) + " is zero");
    }
    r.labels = kmeans_cosine(emb.rows, gp.count.k, cfg.kmeans_seed);
    r.num_speakers = 1 + *std::max_element(r.labels.begin(), r.labels.end());
  }
  r.eigenvalues = std::move(gp.eig.eigenvalues);
  return r;
}

ClusterResult tune_affinity(const SymMatrix& affinity, const ClustererConfig& cfg) {
  const std::vector<double> grid = cfg.p_grid.values();
  // Grid points are independent; the selection below scans them in grid order so
  // the winner does not depend on evaluation order.
  std::vector<GridPoint> points(grid.size());
#pragma omp parallel for schedule(dynamic, 1) if (affinity.order() >= 256)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(grid.size()); ++i) {
    points[static_cast<std::size_t>(i)] = evaluate(affinity, grid[static_cast<std::size_t>(i)], cfg);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].ratio < points[best].ratio) best = i;
  return finish(std::move(points[best]), cfg, static_cast<int>(points.size()));
}

ClusterResult single_embedding_result() {
  ClusterResult r;
  r.labels = {0};
  r.num_speakers = 1;
  return r;
}

}  // namespace

ClusterResult cluster(const std::vector<Embedding>& embeddings, const std::optional<ConstraintMatrix>& constraints,
                      const ClustererConfig& cfg) {
  cfg.validate();
  if (embeddings.empty()) throw Error(ErrorKind::InvalidInput, "cluster: no embeddings");
  if (embeddings.size() == 1) {
    ClusterResult r = single_embedding_result();
    r.chosen_p = cfg.p_percentile;
    return r;
  }
  return finish(evaluate(constrained_affinity(embeddings, constraints, cfg), cfg.p_percentile, cfg), cfg, 1);
}

ClusterResult auto_tune(const std::vector<Embedding>& embeddings, const std::optional<ConstraintMatrix>& constraints,
                        const ClustererConfig& cfg) {
  cfg.validate();
  if (embeddings.empty()) throw Error(ErrorKind::InvalidInput, "auto_tune: no embeddings");
  if (embeddings.size() == 1) {
    ClusterResult r = single_embedding_result();
    r.chosen_p = cfg.p_grid.values().front();
    return r;
  }
  return tune_affinity(constrained_affinity(embeddings, constraints, cfg), cfg);
}

ClusterResult cluster_affinity(const SymMatrix& affinity, const ClustererConfig& cfg) {
  cfg.validate();
  if (affinity.order() == 0) throw Error(ErrorKind::InvalidInput, "cluster_affinity: empty affinity");
  if (affinity.order() == 1) {
    ClusterResult r = single_embedding_result();
    r.chosen_p = cfg.use_autotune ? cfg.p_grid.values().front() : cfg.p_percentile;
    return r;
  }
  return cfg.use_autotune ? tune_affinity(affinity, cfg) : finish(evaluate(affinity, cfg.p_percentile, cfg), cfg, 1);
}

ClusterResult run_clusterer(const std::vector<Embedding>& embeddings,
                            const std::optional<ConstraintMatrix>& constraints, const ClustererConfig& cfg) {
  return cfg.use_autotune ? auto_tune(embeddings, constraints, cfg) : cluster(embeddings, constraints, cfg);
}

}  // namespace ttd
