#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ttd/affinity.h"
#include "ttd/constraints.h"
#include "ttd/spectral.h"

namespace ttd {

struct SpeakerTurnEvent {
  std::int64_t timestamp_ms = 0;
  double confidence = 1.0;

  bool operator==(const SpeakerTurnEvent&) const = default;
};

struct FrameEmbeddingTrack {
  int frame_period_ms = 30;
  std::vector<Embedding> frames;

  std::size_t dim() const { return frames.empty() ? 0 : frames.front().size(); }
  bool operator==(const FrameEmbeddingTrack&) const = default;
};

enum class SegmentOrigin { Turn, Split };

struct SegmentSpan {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  SegmentOrigin origin = SegmentOrigin::Turn;

  std::int64_t duration_ms() const { return end_ms - start_ms; }
  bool operator==(const SegmentSpan&) const = default;
};

struct TurnSegment {
  SegmentSpan span;
  Embedding embedding;
};

struct Segmentation {
  std::vector<SegmentSpan> segments;
  std::vector<SegmentAdjacency> adjacency;
};

inline constexpr std::int64_t kMaxSegmentMs = 6000;

// Splits one turn into ceil(L / max_len_ms) near-equal pieces.
std::vector<SegmentSpan> split_turn(std::int64_t start_ms, std::int64_t end_ms, std::int64_t max_len_ms);

// Turns are delimited by consecutive speaker-turn events. Pairs across an event
// carry has_turn = true with its confidence; pairs between pieces of a split
// turn carry has_turn = false.
Segmentation segment_turns(const std::vector<SpeakerTurnEvent>& events, std::int64_t session_start_ms,
                           std::int64_t session_end_ms, std::int64_t max_len_ms = kMaxSegmentMs);

// Frame at index floor(first + 0.75 * (count - 1)) among frames overlapping the span.
Embedding select_turn_embedding(const FrameEmbeddingTrack& track, const SegmentSpan& span);

struct TimelineEntry {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::string speaker;

  bool operator==(const TimelineEntry&) const = default;
};

struct DiarizationTimeline {
  std::string session_id;
  std::vector<TimelineEntry> entries;

  bool operator==(const DiarizationTimeline&) const = default;
};

// One entry per segment labelled "spk<label>"; contiguous segments sharing a
// label are merged.
DiarizationTimeline labels_to_timeline(const std::string& session_id, const std::vector<SegmentSpan>& segments,
                                       const std::vector<int>& labels);

struct StreamConfig {
  ClustererConfig clusterer;
  std::int64_t max_segment_ms = kMaxSegmentMs;
  int recluster_every = 1;  // re-cluster after this many new segments
};

struct StreamEmission {
  std::size_t segment_index = 0;
  SegmentSpan segment;
  std::vector<int> labels;  // labels of every segment so far
};

// Online diarization: each finalized segment is appended and the whole
// sequence is re-clustered.
class StreamingDiarizer {
 public:
  StreamingDiarizer(const FrameEmbeddingTrack& track, std::int64_t session_start_ms, StreamConfig cfg);

  // The event closes the current turn at its timestamp.
  std::vector<StreamEmission> push_event(const SpeakerTurnEvent& event);

  // Closes the last turn at the session end and flushes pending segments.
  std::vector<StreamEmission> finish(std::int64_t session_end_ms);

  const std::vector<SegmentSpan>& segments() const { return segments_; }
  const std::vector<Embedding>& embeddings() const { return embeddings_; }
  const std::vector<SegmentAdjacency>& adjacency() const { return adjacency_; }
  const ClusterResult& last_result() const { return last_result_; }

 private:
  std::vector<StreamEmission> close_turn(std::int64_t end_ms, bool final);
  StreamEmission recluster();

  const FrameEmbeddingTrack& track_;
  StreamConfig cfg_;
  std::int64_t turn_start_ms_;
  std::optional<SpeakerTurnEvent> opening_event_;
  bool finished_ = false;
  int pending_ = 0;
  std::vector<SegmentSpan> segments_;
  std::vector<Embedding> embeddings_;
  std::vector<SegmentAdjacency> adjacency_;
  ClusterResult last_result_;
};

std::vector<StreamEmission> stream_diarize(const std::vector<SpeakerTurnEvent>& events,
                                           const FrameEmbeddingTrack& track, std::int64_t session_start_ms,
                                           std::int64_t session_end_ms, const StreamConfig& cfg);

struct BatchResult {
  Segmentation segmentation;
  std::vector<Embedding> embeddings;
  ConstraintMatrix constraints;
  ClusterResult result;
};

BatchResult diarize_batch(const std::vector<SpeakerTurnEvent>& events, const FrameEmbeddingTrack& track,
                          std::int64_t session_start_ms, std::int64_t session_end_ms, const StreamConfig& cfg);

// Session end implied by the track length.
std::int64_t track_end_ms(const FrameEmbeddingTrack& track);

}  // namespace ttd
