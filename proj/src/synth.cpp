#include "ttd/synth.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ttd/error.h"

namespace ttd {

namespace {

constexpr int kPrototypeAttempts = 1000;

Embedding unit_gaussian(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Embedding v(static_cast<std::size_t>(dim));
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = normal(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

double dot(const Embedding& a, const Embedding& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

std::vector<Embedding> draw_prototypes(std::mt19937_64& rng, const SynthConfig& cfg) {
  std::vector<Embedding> protos;
  for (int s = 0; s < cfg.num_speakers; ++s) {
    bool placed = false;
    for (int attempt = 0; attempt < kPrototypeAttempts && !placed; ++attempt) {
      Embedding candidate = unit_gaussian(rng, cfg.embedding_dim);
      placed = std::all_of(protos.begin(), protos.end(),
                           [&](const Embedding& p) { return dot(p, candidate) < cfg.max_prototype_cosine; });
      if (placed) protos.push_back(std::move(candidate));
    }
    if (!placed) {
      throw Error(ErrorKind::GenerationFailure, "could not place speaker prototype " + std::to_string(s) +
                                                    " in dimension " + std::to_string(cfg.embedding_dim));
    }
  }
  return protos;
}

}  // namespace

SynthSession synth_generate(const SynthConfig& cfg) {
  if (cfg.num_speakers < 1) throw Error(ErrorKind::InvalidParameter, "need at least one speaker");
  if (cfg.num_turns < cfg.num_speakers) throw Error(ErrorKind::InvalidParameter, "need num_turns >= num_speakers");
  if (cfg.embedding_dim < 1) throw Error(ErrorKind::InvalidParameter, "embedding_dim must be positive");
  if (cfg.noise_std < 0.0) throw Error(ErrorKind::InvalidParameter, "noise_std must be >= 0");
  if (cfg.turn_conf_quality < 0.0 || cfg.turn_conf_quality > 1.0) {
    throw Error(ErrorKind::InvalidParameter, "turn_conf_quality must lie in [0, 1]");
  }
  if (cfg.min_turn_ms < 1 || cfg.max_turn_ms < cfg.min_turn_ms || cfg.frame_period_ms < 1) {
    throw Error(ErrorKind::InvalidParameter, "invalid turn duration range or frame period");
  }

  std::mt19937_64 rng(cfg.seed);
  const std::vector<Embedding> protos = draw_prototypes(rng, cfg);

  // Speaker sequence: a permutation first so every speaker appears, then any
  // speaker other than the previous one.
  SynthSession s;
  std::vector<int> order(static_cast<std::size_t>(cfg.num_speakers));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  s.turn_speakers = order;
  std::uniform_int_distribution<int> other(0, std::max(0, cfg.num_speakers - 2));
  while (static_cast<int>(s.turn_speakers.size()) < cfg.num_turns) {
    const int prev = s.turn_speakers.back();
    if (cfg.num_speakers == 1) {
      s.turn_speakers.push_back(0);
      continue;
    }
    const int pick = other(rng);
    s.turn_speakers.push_back(pick >= prev ? pick + 1 : pick);
  }

  std::uniform_int_distribution<std::int64_t> duration(cfg.min_turn_ms, cfg.max_turn_ms);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  s.reference.session_id = cfg.session_id;
  std::int64_t t = 0;
  for (int i = 0; i < cfg.num_turns; ++i) {
    const std::int64_t end = t + duration(rng);
    const int speaker = s.turn_speakers[static_cast<std::size_t>(i)];
    if (i > 0 && speaker != s.turn_speakers[static_cast<std::size_t>(i) - 1]) {
      const double conf = unit(rng) < cfg.turn_conf_quality ? 1.0 : unit(rng);
      s.events.push_back({t, conf});
    }
    const std::string label = "S" + std::to_string(speaker);
    if (!s.reference.entries.empty() && s.reference.entries.back().speaker == label) {
      s.reference.entries.back().end_ms = end;
    } else {
      s.reference.entries.push_back({t, end, label});
    }
    t = end;
  }
  s.session_end_ms = t;

  // Frame j is voiced by whoever speaks at its start time.
  const std::int64_t period = cfg.frame_period_ms;
  const auto num_frames = static_cast<std::size_t>((t + period - 1) / period);
  s.track.frame_period_ms = cfg.frame_period_ms;
  s.track.frames.reserve(num_frames);
  std::normal_distribution<double> noise(0.0, cfg.noise_std > 0.0 ? cfg.noise_std : 1.0);
  std::size_t entry = 0;
  for (std::size_t j = 0; j < num_frames; ++j) {
    const std::int64_t at = static_cast<std::int64_t>(j) * period;
    while (s.reference.entries[entry].end_ms <= at) ++entry;
    const std::string& label = s.reference.entries[entry].speaker;
    const auto& proto = protos[static_cast<std::size_t>(std::stoi(label.substr(1)))];
    Embedding frame = proto;
    if (cfg.noise_std > 0.0) {
      double norm = 0.0;
      for (double& x : frame) {
        x += noise(rng);
        norm += x * x;
      }
      norm = std::sqrt(norm);
      for (double& x : frame) x /= norm;
    }
    s.track.frames.push_back(std::move(frame));
  }
  return s;
}

}  // namespace ttd
