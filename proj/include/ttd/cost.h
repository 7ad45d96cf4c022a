#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ttd/error.h"
#include "ttd/spectral.h"

namespace ttd {

enum class CostMode { Dense, Turn };

std::string_view to_string(CostMode mode);

struct CostAssumptions {
  double dense_segment_s = 0.4;   // window-wise dense embeddings
  double turn_length_s = 4.0;     // average speaker turn
  int num_speakers = 4;
  double cadence_s = 4.0;         // clustering runs every 4 s of audio
  // Decompositions per auto-tuned run. The cost model assumes 10 searched p
  // values, fewer than the 12 of the default clustering grid.
  int autotune_steps = 10;
  int embedding_dim = 128;
  // Neural components are not run; their rates are fixed constants.
  double turn_detection_gflops = 0.58;
  double speaker_encoder_gflops = 0.42;
  // Largest N actually decomposed. Beyond it, timings are scaled by the cubic
  // (quadratic for Laplacian & K-means) model and flagged as extrapolated.
  std::size_t measure_cap_n = 1000;
  // Larger sessions are refused with CapExceededError.
  std::size_t memory_cap_n = 50000;
  int repetitions = 3;
  std::uint64_t seed = 0;
};

struct ComponentCost {
  std::string name;
  double gflops = 0.0;       // GFLOP per second of audio, over the whole session
  double wall_time_s = 0.0;  // per clustering run at the final N
  bool stub = false;
  bool extrapolated = false;
};

struct CostReport {
  CostMode mode = CostMode::Turn;
  bool autotune = false;
  bool constraints = false;
  double audio_minutes = 0.0;
  std::size_t num_embeddings = 0;   // N at the end of the session
  std::size_t measured_n = 0;       // N actually run (<= measure_cap_n)
  std::size_t clustering_runs = 0;  // runs over the session at the cadence
  int decompositions_per_run = 0;
  std::uint64_t jacobi_sweeps = 0;
  double eig_flop_coefficient = 0.0;  // c in c * N^3 flops per decomposition
  std::vector<ComponentCost> components;

  double total_gflops() const;
  double total_wall_time_s() const;
  const ComponentCost& component(std::string_view name) const;
};

inline constexpr std::string_view kTurnDetection = "speaker_turn_detection";
inline constexpr std::string_view kSpeakerEncoder = "speaker_encoder";
inline constexpr std::string_view kEigendecomposition = "eigendecomposition";
inline constexpr std::string_view kE2cp = "e2cp";
inline constexpr std::string_view kLaplacianKMeans = "laplacian_kmeans";

class CapExceededError : public Error {
 public:
  CapExceededError(const std::string& what, CostReport partial)
      : Error(ErrorKind::CapExceeded, what), partial_(std::move(partial)) {}
  const CostReport& partial() const noexcept { return partial_; }

 private:
  CostReport partial_;
};

// Runs the clustering stack on synthetic embeddings sized like `audio_minutes`
// of audio and reports per-component cost. Constraints (E2CP) apply in turn mode
// when `constraints` is set; dense mode never uses them.
CostReport cost_benchmark(double audio_minutes, CostMode mode, bool autotune, const CostAssumptions& assumptions = {},
                          const ClustererConfig& clusterer = {}, bool constraints = true);

}  // namespace ttd
