#include "ttd/pipeline.h"

#include <cmath>
#include <string>

#include "ttd/error.h"

namespace ttd {

std::vector<SegmentSpan> split_turn(std::int64_t start_ms, std::int64_t end_ms, std::int64_t max_len_ms) {
  if (end_ms <= start_ms) throw Error(ErrorKind::InvalidInput, "turn has no duration");
  if (max_len_ms <= 0) throw Error(ErrorKind::InvalidParameter, "max segment length must be positive");
  const std::int64_t length = end_ms - start_ms;
  const std::int64_t pieces = (length + max_len_ms - 1) / max_len_ms;
  std::vector<SegmentSpan> out;
  out.reserve(static_cast<std::size_t>(pieces));
  for (std::int64_t j = 0; j < pieces; ++j) {
    out.push_back({start_ms + j * length / pieces, start_ms + (j + 1) * length / pieces,
                   j == 0 ? SegmentOrigin::Turn : SegmentOrigin::Split});
  }
  return out;
}

namespace {

void validate_events(const std::vector<SpeakerTurnEvent>& events, std::int64_t start_ms, std::int64_t end_ms) {
  if (end_ms <= start_ms) {
    throw Error(ErrorKind::EmptySession,
                "session [" + std::to_string(start_ms) + ", " + std::to_string(end_ms) + "] is empty");
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    const SpeakerTurnEvent& e = events[i];
    if (i > 0 && e.timestamp_ms <= events[i - 1].timestamp_ms) {
      throw Error(ErrorKind::OrderingError, "turn event " + std::to_string(i) + " at " +
                                                std::to_string(e.timestamp_ms) + " ms is not after the previous one");
    }
    if (e.timestamp_ms <= start_ms || e.timestamp_ms >= end_ms) {
      throw Error(ErrorKind::RangeError,
                  "turn event " + std::to_string(i) + " at " + std::to_string(e.timestamp_ms) + " ms outside session");
    }
    if (!(e.confidence >= 0.0 && e.confidence <= 1.0)) {
      throw Error(ErrorKind::RangeError, "turn event " + std::to_string(i) + " confidence outside [0, 1]");
    }
  }
}

// Appends the pieces of one turn, linking them to what came before.
void append_turn(Segmentation& seg, std::int64_t start_ms, std::int64_t end_ms, std::int64_t max_len_ms,
                 const std::optional<SpeakerTurnEvent>& opening_event) {
  for (const SegmentSpan& piece : split_turn(start_ms, end_ms, max_len_ms)) {
    if (!seg.segments.empty()) {
      const std::size_t prev = seg.segments.size() - 1;
      if (piece.origin == SegmentOrigin::Turn) {
        seg.adjacency.push_back({prev, true, opening_event ? opening_event->confidence : 1.0});
      } else {
        seg.adjacency.push_back({prev, false, 0.0});
      }
    }
    seg.segments.push_back(piece);
  }
}

}  // namespace

Segmentation segment_turns(const std::vector<SpeakerTurnEvent>& events, std::int64_t session_start_ms,
                           std::int64_t session_end_ms, std::int64_t max_len_ms) {
  validate_events(events, session_start_ms, session_end_ms);
  Segmentation seg;
  std::int64_t start = session_start_ms;
  std::optional<SpeakerTurnEvent> opening;
  for (const SpeakerTurnEvent& e : events) {
    append_turn(seg, start, e.timestamp_ms, max_len_ms, opening);
    start = e.timestamp_ms;
    opening = e;
  }
  append_turn(seg, start, session_end_ms, max_len_ms, opening);
  return seg;
}

Embedding select_turn_embedding(const FrameEmbeddingTrack& track, const SegmentSpan& span) {
  if (track.frame_period_ms <= 0) throw Error(ErrorKind::InvalidInput, "frame period must be positive");
  const std::int64_t period = track.frame_period_ms;
  if (span.end_ms <= span.start_ms || span.start_ms < 0 || track.frames.empty()) {
    throw Error(ErrorKind::EmptySegment, "segment [" + std::to_string(span.start_ms) + ", " +
                                             std::to_string(span.end_ms) + "] overlaps no frames");
  }
  // Frame j covers [j * period, (j + 1) * period).
  const std::int64_t first = span.start_ms / period;
  const std::int64_t last =
      std::min<std::int64_t>((span.end_ms + period - 1) / period - 1, static_cast<std::int64_t>(track.frames.size()) - 1);
  if (first > last) {
    throw Error(ErrorKind::EmptySegment, "segment [" + std::to_string(span.start_ms) + ", " +
                                             std::to_string(span.end_ms) + "] overlaps no frames");
  }
  const std::int64_t count = last - first + 1;
  const auto index = first + static_cast<std::int64_t>(std::floor(0.75 * static_cast<double>(count - 1)));
  return track.frames[static_cast<std::size_t>(index)];
}

DiarizationTimeline labels_to_timeline(const std::string& session_id, const std::vector<SegmentSpan>& segments,
                                       const std::vector<int>& labels) {
  if (segments.size() != labels.size()) {
    throw Error(ErrorKind::DimensionError, std::to_string(segments.size()) + " segments but " +
                                               std::to_string(labels.size()) + " labels");
  }
  DiarizationTimeline t{session_id, {}};
  for (std::size_t i = 0; i < segments.size(); ++i) {
    std::string speaker = "spk" + std::to_string(labels[i]);
    if (!t.entries.empty() && t.entries.back().speaker == speaker && t.entries.back().end_ms == segments[i].start_ms) {
      t.entries.back().end_ms = segments[i].end_ms;
    } else {
      t.entries.push_back({segments[i].start_ms, segments[i].end_ms, std::move(speaker)});
    }
  }
  return t;
}

StreamingDiarizer::StreamingDiarizer(const FrameEmbeddingTrack& track, std::int64_t session_start_ms, StreamConfig cfg)
    : track_(track), cfg_(std::move(cfg)), turn_start_ms_(session_start_ms) {
  cfg_.clusterer.validate();
  if (cfg_.recluster_every < 1) throw Error(ErrorKind::InvalidParameter, "recluster_every must be >= 1");
}

std::vector<StreamEmission> StreamingDiarizer::push_event(const SpeakerTurnEvent& event) {
  if (finished_) throw Error(ErrorKind::OrderingError, "event after the session was finished");
  if (event.timestamp_ms <= turn_start_ms_) {
    throw Error(ErrorKind::OrderingError, "event at " + std::to_string(event.timestamp_ms) +
                                              " ms does not follow " + std::to_string(turn_start_ms_) + " ms");
  }
  if (!(event.confidence >= 0.0 && event.confidence <= 1.0)) {
    throw Error(ErrorKind::RangeError, "turn confidence outside [0, 1]");
  }
  auto out = close_turn(event.timestamp_ms, false);
  turn_start_ms_ = event.timestamp_ms;
  opening_event_ = event;
  return out;
}

std::vector<StreamEmission> StreamingDiarizer::finish(std::int64_t session_end_ms) {
  if (finished_) throw Error(ErrorKind::OrderingError, "session already finished");
  if (session_end_ms <= turn_start_ms_) {
    throw Error(segments_.empty() ? ErrorKind::EmptySession : ErrorKind::OrderingError,
                "session end " + std::to_string(session_end_ms) + " ms does not follow " +
                    std::to_string(turn_start_ms_) + " ms");
  }
  auto out = close_turn(session_end_ms, true);
  finished_ = true;
  return out;
}

std::vector<StreamEmission> StreamingDiarizer::close_turn(std::int64_t end_ms, bool final) {
  Segmentation seg{segments_, adjacency_};
  append_turn(seg, turn_start_ms_, end_ms, cfg_.max_segment_ms, opening_event_);

  std::vector<StreamEmission> out;
  for (std::size_t i = segments_.size(); i < seg.segments.size(); ++i) {
    const SegmentSpan& span = seg.segments[i];
    embeddings_.push_back(select_turn_embedding(track_, span));
    segments_.push_back(span);
    adjacency_.assign(seg.adjacency.begin(), seg.adjacency.begin() + static_cast<std::ptrdiff_t>(i));
    ++pending_;
    const bool last_piece = i + 1 == seg.segments.size();
    if (pending_ >= cfg_.recluster_every || (final && last_piece)) out.push_back(recluster());
  }
  return out;
}

StreamEmission StreamingDiarizer::recluster() {
  const ConstraintMatrix constraints =
      build_constraints(segments_.size(), adjacency_, cfg_.clusterer.propagation.sigma_threshold);
  last_result_ = run_clusterer(embeddings_, constraints, cfg_.clusterer);
  pending_ = 0;
  return {segments_.size() - 1, segments_.back(), last_result_.labels};
}

std::vector<StreamEmission> stream_diarize(const std::vector<SpeakerTurnEvent>& events,
                                           const FrameEmbeddingTrack& track, std::int64_t session_start_ms,
                                           std::int64_t session_end_ms, const StreamConfig& cfg) {
  validate_events(events, session_start_ms, session_end_ms);
  StreamingDiarizer diarizer(track, session_start_ms, cfg);
  std::vector<StreamEmission> out;
  for (const SpeakerTurnEvent& e : events) {
    auto emitted = diarizer.push_event(e);
    out.insert(out.end(), std::make_move_iterator(emitted.begin()), std::make_move_iterator(emitted.end()));
  }
  auto emitted = diarizer.finish(session_end_ms);
  out.insert(out.end(), std::make_move_iterator(emitted.begin()), std::make_move_iterator(emitted.end()));
  return out;
}

BatchResult diarize_batch(const std::vector<SpeakerTurnEvent>& events, const FrameEmbeddingTrack& track,
                          std::int64_t session_start_ms, std::int64_t session_end_ms, const StreamConfig& cfg) {
  BatchResult out;
  out.segmentation = segment_turns(events, session_start_ms, session_end_ms, cfg.max_segment_ms);
  for (const SegmentSpan& span : out.segmentation.segments) out.embeddings.push_back(select_turn_embedding(track, span));
  out.constraints = build_constraints(out.segmentation.segments.size(), out.segmentation.adjacency,
                                      cfg.clusterer.propagation.sigma_threshold);
  out.result = run_clusterer(out.embeddings, out.constraints, cfg.clusterer);
  return out;
}

std::int64_t track_end_ms(const FrameEmbeddingTrack& track) {
  return static_cast<std::int64_t>(track.frames.size()) * track.frame_period_ms;
}

}  // namespace ttd
