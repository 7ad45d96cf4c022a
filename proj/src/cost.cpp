#include "ttd/cost.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "ttd/affinity.h"
#include "ttd/constraints.h"
#include "ttd/kernels.h"
#include "ttd/numerics.h"

namespace ttd {

std::string_view to_string(CostMode mode) { return mode == CostMode::Dense ? "dense" : "turn"; }

double CostReport::total_gflops() const {
  double sum = 0.0;
  for (const auto& c : components) sum += c.gflops;
  return sum;
}

double CostReport::total_wall_time_s() const {
  double sum = 0.0;
  for (const auto& c : components) sum += c.wall_time_s;
  return sum;
}

const ComponentCost& CostReport::component(std::string_view name) const {
  for (const auto& c : components)
    if (c.name == name) return c;
  throw Error(ErrorKind::InvalidInput, "no cost component named " + std::string(name));
}

namespace {

template <typename F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Speakers take turns of `per_turn` consecutive embeddings.
std::vector<Embedding> synthetic_embeddings(std::size_t n, std::size_t per_turn, const CostAssumptions& a) {
  std::mt19937_64 rng(a.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto dim = static_cast<std::size_t>(a.embedding_dim);
  std::vector<Embedding> protos(static_cast<std::size_t>(a.num_speakers), Embedding(dim));
  for (auto& p : protos)
    for (double& x : p) x = normal(rng);
  std::uniform_int_distribution<int> speaker(0, a.num_speakers - 1);
  std::vector<Embedding> out;
  out.reserve(n);
  int current = speaker(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (i % per_turn == 0) current = speaker(rng);
    Embedding e = protos[static_cast<std::size_t>(current)];
    for (double& x : e) x += 0.3 * normal(rng);
    out.push_back(std::move(e));
  }
  return out;
}

// Restricts OpenMP to one thread for the measured sections.
class SingleThreadScope {
 public:
  SingleThreadScope();
  ~SingleThreadScope();
  SingleThreadScope(const SingleThreadScope&) = delete;
  SingleThreadScope& operator=(const SingleThreadScope&) = delete;

 private:
  int previous_;
};

}  // namespace
}  // namespace ttd

#ifdef _OPENMP
#include <omp.h>
ttd::SingleThreadScope::SingleThreadScope() : previous_(omp_get_max_threads()) { omp_set_num_threads(1); }
ttd::SingleThreadScope::~SingleThreadScope() { omp_set_num_threads(previous_); }
#else
ttd::SingleThreadScope::SingleThreadScope() : previous_(1) {}
ttd::SingleThreadScope::~SingleThreadScope() = default;
#endif

namespace ttd {

CostReport cost_benchmark(double audio_minutes, CostMode mode, bool autotune, const CostAssumptions& a,
                          const ClustererConfig& clusterer, bool constraints) {
  if (!(audio_minutes > 0.0)) throw Error(ErrorKind::InvalidParameter, "audio_minutes must be positive");
  if (a.repetitions < 1) throw Error(ErrorKind::InvalidParameter, "repetitions must be >= 1");
  if (a.autotune_steps < 1) throw Error(ErrorKind::InvalidParameter, "autotune_steps must be >= 1");
  if (a.num_speakers < 1 || a.embedding_dim < 1) throw Error(ErrorKind::InvalidParameter, "bad synthetic setup");

  const bool dense = mode == CostMode::Dense;
  const double audio_s = audio_minutes * 60.0;
  const double segment_s = dense ? a.dense_segment_s : a.turn_length_s;

  CostReport report;
  report.mode = mode;
  report.autotune = autotune;
  report.constraints = constraints && !dense;
  report.audio_minutes = audio_minutes;
  report.num_embeddings = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(audio_s / segment_s)));
  report.clustering_runs = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(audio_s / a.cadence_s)));
  report.decompositions_per_run = autotune ? a.autotune_steps : 1;
  report.components = {
      {std::string(kTurnDetection), dense ? 0.0 : a.turn_detection_gflops, 0.0, true, false},
      {std::string(kSpeakerEncoder), a.speaker_encoder_gflops, 0.0, true, false},
  };
  if (report.num_embeddings > a.memory_cap_n) {
    throw CapExceededError("N = " + std::to_string(report.num_embeddings) + " exceeds memory cap " +
                               std::to_string(a.memory_cap_n),
                           report);
  }

  const std::size_t n_final = report.num_embeddings;
  const std::size_t n = std::min(n_final, std::max<std::size_t>(2, a.measure_cap_n));
  report.measured_n = n;
  const bool extrapolated = n < n_final;
  const double cubic = std::pow(static_cast<double>(n_final) / static_cast<double>(n), 3.0);
  const double quadratic = std::pow(static_cast<double>(n_final) / static_cast<double>(n), 2.0);

  const auto per_turn = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(a.turn_length_s / segment_s)));
  const std::vector<Embedding> embeddings = synthetic_embeddings(n, per_turn, a);
  std::vector<SegmentAdjacency> adjacency;
  for (std::size_t i = 0; i + 1 < n; ++i) adjacency.push_back({i, (i + 1) % per_turn == 0, 1.0});
  const ConstraintMatrix z = build_constraints(n, adjacency, clusterer.propagation.sigma_threshold);

  SingleThreadScope single_thread;
  std::vector<double> t_e2cp;
  std::vector<double> t_eig;
  std::vector<double> t_lap;
  EigenDecomposition last;
  for (int rep = 0; rep < a.repetitions; ++rep) {
    SymMatrix affinity = cosine_affinity(embeddings);
    if (report.constraints) {
      t_e2cp.push_back(seconds([&] {
        const ConstraintMatrix q = e2cp_closed_form(z, symmetric_normalize(affinity), clusterer.propagation.alpha);
        affinity = adjust_affinity(affinity, q);
      }));
    }
    RefinementConfig refinement;
    refinement.p_percentile = clusterer.p_percentile;
    SymMatrix l;
    double lap = seconds([&] { l = laplacian(refine(affinity, refinement), true); });
    t_eig.push_back(seconds([&] { last = sym_eig(l, true); }));
    lap *= report.decompositions_per_run;
    lap += seconds([&] {
      const int k = std::min<int>(a.num_speakers, static_cast<int>(n));
      kmeans_cosine(spectral_embed(last, k).rows, k, clusterer.kmeans_seed);
    });
    t_lap.push_back(lap);
  }
  report.jacobi_sweeps = static_cast<std::uint64_t>(last.sweeps);

  // Flop model. The Jacobi kernel spends 18 n flops per rotation (two rows, two
  // columns, two eigenvector rows), which calibrates c in c * N^3.
  const double nd = static_cast<double>(n);
  report.eig_flop_coefficient = static_cast<double>(last.rotations) * 18.0 * nd / (nd * nd * nd);
  constexpr double kE2cpCoefficient = 1.0 / 3.0 + 4.0 + 4.0;  // Cholesky, two n-RHS solves, two residual checks
  const int k = a.num_speakers;

  double eig_flops = 0.0;
  double e2cp_flops = 0.0;
  double lap_flops = 0.0;
  for (std::size_t j = 1; j <= report.clustering_runs; ++j) {
    const double nj = std::min(static_cast<double>(n_final),
                               std::max(1.0, std::floor(static_cast<double>(j) * a.cadence_s / segment_s)));
    eig_flops += report.eig_flop_coefficient * nj * nj * nj * report.decompositions_per_run;
    if (report.constraints) e2cp_flops += kE2cpCoefficient * nj * nj * nj;
    lap_flops += 10.0 * nj * nj * report.decompositions_per_run + 10.0 * 20.0 * 3.0 * nj * k * k;
  }

  const double eig_wall = median(t_eig) * report.decompositions_per_run * (extrapolated ? cubic : 1.0);
  report.components.push_back({std::string(kEigendecomposition), eig_flops / audio_s / 1e9, eig_wall, false, extrapolated});
  report.components.push_back({std::string(kE2cp), e2cp_flops / audio_s / 1e9,
                               t_e2cp.empty() ? 0.0 : median(t_e2cp) * (extrapolated ? cubic : 1.0), false,
                               extrapolated && report.constraints});
  report.components.push_back({std::string(kLaplacianKMeans), lap_flops / audio_s / 1e9,
                               median(t_lap) * (extrapolated ? quadratic : 1.0), false, extrapolated});
  return report;
}

}  // namespace ttd
