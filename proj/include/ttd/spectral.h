#pragma once

#include <optional>
#include <vector>

#include "ttd/affinity.h"
#include "ttd/constraints.h"
#include "ttd/matrix.h"
#include "ttd/numerics.h"

namespace ttd {

enum class LaplacianType { Normalized, Unnormalized };

struct PercentileGrid {
  double start = 0.40;
  double stop = 0.95;
  double step = 0.05;

  std::vector<double> values() const;
};

struct ClustererConfig {
  double p_percentile = 0.95;
  bool use_autotune = true;
  PercentileGrid p_grid;
  bool use_constraints = true;
  PropagationConfig propagation;
  int max_speakers = 10;
  int min_speakers = 1;
  double epsilon = 1e-10;
  // With min_speakers <= 1, a maximal eigen-gap ratio (over k >= 2) below this
  // value is read as a single speaker.
  double single_speaker_gap = 1.3;
  LaplacianType laplacian = LaplacianType::Normalized;
  double blur_sigma = 0.0;
  RngSeed kmeans_seed{0};

  void validate() const;
};

struct ClusterResult {
  std::vector<int> labels;
  int num_speakers = 0;
  double chosen_p = 0.0;
  double ratio = 0.0;  // sqrt(1 - p) / g_p at the chosen p
  double max_gap = 0.0;
  std::vector<double> eigenvalues;
  int decompositions = 0;
};

SymMatrix laplacian(const SymMatrix& a, bool normalized);

struct SpeakerCount {
  int k = 1;
  double max_gap = 0.0;  // g = max lambda_{k+1} / (lambda_k + eps) over the scored candidates
};

// Eigen-gap speaker counting on ascending Laplacian eigenvalues.
//
// Candidates k >= 2 are scored by lambda_{k+1} / (lambda_k + epsilon); the best
// score wins, ties toward smaller k. lambda_1 of a Laplacian is 0 by
// construction, so k = 1 cannot be scored the same way: it is returned when it
// is the only candidate, or when min_k <= 1 and the best score is below
// `single_speaker_gap`.
SpeakerCount count_speakers(const std::vector<double>& eigenvalues, int min_k, int max_k, double epsilon,
                            double single_speaker_gap);

// count_speakers with the single-speaker floor disabled.
int estimate_k(const std::vector<double>& eigenvalues, int min_k, int max_k, double epsilon);

struct SpectralEmbedding {
  Matrix rows;                           // N x k, nonzero rows have unit norm
  std::vector<std::size_t> zero_rows;    // rows that could not be normalized
};

// First k eigenvectors of the decomposition (ascending), rows re-normalized.
SpectralEmbedding spectral_embed(const EigenDecomposition& eig, int k);
SpectralEmbedding spectral_embed(const SymMatrix& l, int k);

// Whole pipeline at the single percentile cfg.p_percentile:
// affinity -> [constraint adjustment] -> refinement -> Laplacian -> eigen-gap -> k-means.
ClusterResult cluster(const std::vector<Embedding>& embeddings, const std::optional<ConstraintMatrix>& constraints,
                      const ClustererConfig& cfg);

// Percentile search minimizing r(p) = sqrt(1 - p) / g_p over cfg.p_grid.
ClusterResult auto_tune(const std::vector<Embedding>& embeddings,
                        const std::optional<ConstraintMatrix>& constraints, const ClustererConfig& cfg);

// Clustering from an already constrained affinity (refinement onwards), with or
// without auto-tune according to cfg.use_autotune.
ClusterResult cluster_affinity(const SymMatrix& affinity, const ClustererConfig& cfg);

// Dispatches on cfg.use_autotune.
ClusterResult run_clusterer(const std::vector<Embedding>& embeddings,
                            const std::optional<ConstraintMatrix>& constraints, const ClustererConfig& cfg);

// Affinity after optional constraint adjustment; shared by cluster and auto_tune.
SymMatrix constrained_affinity(const std::vector<Embedding>& embeddings,
                               const std::optional<ConstraintMatrix>& constraints, const ClustererConfig& cfg);

}  // namespace ttd
