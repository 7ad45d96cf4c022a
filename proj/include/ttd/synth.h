#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ttd/pipeline.h"

namespace ttd {

// Synthetic session standing in for the speaker-turn detector and speaker
// encoder: speakers are fixed prototype directions, frames are noisy copies,
// turn events sit exactly on speaker changes.
struct SynthConfig {
  int num_speakers = 4;
  int num_turns = 40;
  int embedding_dim = 256;
  double noise_std = 0.1;          // per-dimension Gaussian noise before renormalization
  double turn_conf_quality = 1.0;  // probability that a turn event has confidence 1
  std::uint64_t seed = 0;
  int frame_period_ms = 30;
  std::int64_t min_turn_ms = 1000;
  std::int64_t max_turn_ms = 10000;
  double max_prototype_cosine = 0.3;
  std::string session_id = "synth";
};

struct SynthSession {
  FrameEmbeddingTrack track;
  std::vector<SpeakerTurnEvent> events;
  DiarizationTimeline reference;
  std::vector<int> turn_speakers;
  std::int64_t session_end_ms = 0;
};

SynthSession synth_generate(const SynthConfig& cfg);

}  // namespace ttd
