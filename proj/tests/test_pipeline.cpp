#include <set>

#include "doctest.h"
#include "support.h"
#include "ttd/constraints.h"
#include "ttd/der.h"
#include "ttd/error.h"
#include "ttd/pipeline.h"
#include "ttd/synth.h"

using namespace ttd;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidInput;
}

FrameEmbeddingTrack counting_track(std::size_t frames) {
  FrameEmbeddingTrack t;
  for (std::size_t i = 0; i < frames; ++i) t.frames.push_back({static_cast<double>(i) + 1.0, 1.0});
  return t;
}

SynthSession make_session(int speakers, int turns, double noise, double quality, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.num_speakers = speakers;
  cfg.num_turns = turns;
  cfg.noise_std = noise;
  cfg.turn_conf_quality = quality;
  cfg.seed = seed;
  cfg.embedding_dim = 64;
  return synth_generate(cfg);
}

double confusion(const SynthSession& s, const StreamConfig& cfg) {
  const auto batch = diarize_batch(s.events, s.track, 0, s.session_end_ms, cfg);
  const auto hyp = labels_to_timeline(s.reference.session_id, batch.segmentation.segments, batch.result.labels);
  return der(s.reference, hyp).confusion_pct;
}

}  // namespace

TEST_CASE("two events in a 20 s session") {
  // The 7 s middle turn and the 8 s last turn both exceed 6 s and split in two.
  const auto seg = segment_turns({{5000, 0.9}, {12000, 0.7}}, 0, 20000);
  REQUIRE(seg.segments.size() == 5);
  CHECK(seg.segments[0] == SegmentSpan{0, 5000, SegmentOrigin::Turn});
  CHECK(seg.segments[1] == SegmentSpan{5000, 8500, SegmentOrigin::Turn});
  CHECK(seg.segments[2] == SegmentSpan{8500, 12000, SegmentOrigin::Split});
  CHECK(seg.segments[3] == SegmentSpan{12000, 16000, SegmentOrigin::Turn});
  CHECK(seg.segments[4] == SegmentSpan{16000, 20000, SegmentOrigin::Split});
  REQUIRE(seg.adjacency.size() == 4);
  CHECK(seg.adjacency[0].has_turn);
  CHECK(seg.adjacency[0].confidence == 0.9);
  CHECK_FALSE(seg.adjacency[1].has_turn);
  CHECK(seg.adjacency[2].has_turn);
  CHECK(seg.adjacency[2].confidence == 0.7);
  CHECK_FALSE(seg.adjacency[3].has_turn);
}

TEST_CASE("turns within the length limit stay whole") {
  const auto seg = segment_turns({{5000, 0.9}, {11000, 0.2}}, 0, 15000);
  REQUIRE(seg.segments.size() == 3);
  CHECK(seg.segments[1] == SegmentSpan{5000, 11000, SegmentOrigin::Turn});
  CHECK(seg.adjacency[1].confidence == 0.2);
  const auto q = build_constraints(3, seg.adjacency, 0.5);
  CHECK(q(0, 1) == -1.0);
  CHECK(q(1, 2) == 0.0);
}

TEST_CASE("no events: a long session splits into equal must-linked pieces") {
  const auto seg = segment_turns({}, 0, 20000);
  REQUIRE(seg.segments.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(seg.segments[i].duration_ms() == 5000);
  for (const auto& adj : seg.adjacency) CHECK_FALSE(adj.has_turn);
  const auto short_session = segment_turns({}, 0, 3000);
  CHECK(short_session.segments.size() == 1);
  CHECK(short_session.adjacency.empty());
}

TEST_CASE("segmentation errors") {
  CHECK(kind_of([] { segment_turns({}, 1000, 1000); }) == ErrorKind::EmptySession);
  CHECK(kind_of([] { segment_turns({{5000, 0.5}, {4000, 0.5}}, 0, 9000); }) == ErrorKind::OrderingError);
  CHECK(kind_of([] { segment_turns({{5000, 0.5}, {5000, 0.5}}, 0, 9000); }) == ErrorKind::OrderingError);
  CHECK(kind_of([] { segment_turns({{9500, 0.5}}, 0, 9000); }) == ErrorKind::RangeError);
  CHECK(kind_of([] { segment_turns({{500, 1.5}}, 0, 9000); }) == ErrorKind::RangeError);
}

TEST_CASE("segments tile the session and never exceed 6 s") {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<std::int64_t> gap(1, 20000);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SpeakerTurnEvent> events;
    std::int64_t t = 0;
    for (int i = 0; i < 10; ++i) events.push_back({t += gap(rng), conf(rng)});
    const std::int64_t end = t + gap(rng);
    const auto seg = segment_turns(events, 0, end);
    std::int64_t cursor = 0;
    for (const auto& s : seg.segments) {
      CHECK(s.start_ms == cursor);
      CHECK(s.end_ms > s.start_ms);
      CHECK(s.duration_ms() <= kMaxSegmentMs);
      cursor = s.end_ms;
    }
    CHECK(cursor == end);
    CHECK(seg.adjacency.size() == seg.segments.size() - 1);
  }
}

TEST_CASE("turn embedding sits at 75% of the overlapping frames") {
  const auto track = counting_track(200);
  CHECK(select_turn_embedding(track, {0, 3000, SegmentOrigin::Turn})[0] == 75.0);     // frame 74
  CHECK(select_turn_embedding(track, {300, 420, SegmentOrigin::Turn})[0] == 13.0);    // frames 10..13 -> 12
  CHECK(select_turn_embedding(track, {310, 320, SegmentOrigin::Turn})[0] == 11.0);    // one frame
  CHECK(kind_of([&] { select_turn_embedding(track, {6000, 7000, SegmentOrigin::Turn}); }) == ErrorKind::EmptySegment);
}

TEST_CASE("timeline merges contiguous segments of one label") {
  const std::vector<SegmentSpan> segs{{0, 10, SegmentOrigin::Turn},
                                      {10, 20, SegmentOrigin::Split},
                                      {20, 30, SegmentOrigin::Turn},
                                      {30, 40, SegmentOrigin::Turn}};
  const auto t = labels_to_timeline("s", segs, {0, 0, 1, 0});
  REQUIRE(t.entries.size() == 3);
  CHECK(t.entries[0] == TimelineEntry{0, 20, "spk0"});
  CHECK(t.entries[1] == TimelineEntry{20, 30, "spk1"});
  CHECK(t.entries[2] == TimelineEntry{30, 40, "spk0"});
}

TEST_CASE("two-segment stream: the second emission equals the batch result") {
  const SynthSession s = make_session(2, 2, 0.1, 1.0, 3);
  REQUIRE(s.events.size() == 1);
  StreamConfig cfg;
  cfg.max_segment_ms = 100000;
  const auto emissions = stream_diarize(s.events, s.track, 0, s.session_end_ms, cfg);
  REQUIRE(emissions.size() == 2);
  CHECK(emissions[0].labels.size() == 1);
  const auto batch = diarize_batch(s.events, s.track, 0, s.session_end_ms, cfg);
  CHECK(emissions[1].labels == batch.result.labels);
}

TEST_CASE("streaming final labels equal batch labels and replay is identical") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SynthSession s = make_session(3, 12, 0.15, 0.9, seed);
    StreamConfig cfg;
    const auto a = stream_diarize(s.events, s.track, 0, s.session_end_ms, cfg);
    const auto b = stream_diarize(s.events, s.track, 0, s.session_end_ms, cfg);
    const auto batch = diarize_batch(s.events, s.track, 0, s.session_end_ms, cfg);
    REQUIRE(!a.empty());
    CHECK(a.back().labels == batch.result.labels);
    CHECK(a.size() == batch.segmentation.segments.size());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].labels == b[i].labels);
      CHECK(a[i].segment == b[i].segment);
      CHECK(a[i].segment.duration_ms() <= kMaxSegmentMs);
      CHECK(a[i].labels.size() == i + 1);
    }
  }
}

TEST_CASE("batched re-clustering still ends on the batch result") {
  const SynthSession s = make_session(3, 12, 0.1, 1.0, 4);
  StreamConfig cfg;
  cfg.recluster_every = 4;
  const auto emissions = stream_diarize(s.events, s.track, 0, s.session_end_ms, cfg);
  const auto batch = diarize_batch(s.events, s.track, 0, s.session_end_ms, cfg);
  CHECK(emissions.size() < batch.segmentation.segments.size());
  CHECK(emissions.back().labels == batch.result.labels);
}

TEST_CASE("out-of-order events are rejected by the stream") {
  const SynthSession s = make_session(2, 4, 0.1, 1.0, 5);
  StreamingDiarizer stream(s.track, 0, {});
  stream.push_event(s.events[1]);
  CHECK(kind_of([&] { stream.push_event(s.events[0]); }) == ErrorKind::OrderingError);
}

TEST_CASE("generator output") {
  const SynthSession a = make_session(4, 20, 0.1, 0.8, 11);
  const SynthSession b = make_session(4, 20, 0.1, 0.8, 11);
  CHECK(a.track == b.track);
  CHECK(a.events == b.events);
  CHECK(a.reference == b.reference);
  REQUIRE(a.turn_speakers.size() == 20);
  for (std::size_t i = 1; i < a.turn_speakers.size(); ++i) CHECK(a.turn_speakers[i] != a.turn_speakers[i - 1]);
  CHECK(std::set<int>(a.turn_speakers.begin(), a.turn_speakers.end()).size() == 4);
  CHECK(a.events.size() == 19);
  std::int64_t previous = 0;
  for (const auto& e : a.events) {
    CHECK(e.timestamp_ms - previous >= 1000);
    CHECK(e.timestamp_ms - previous <= 10000);
    previous = e.timestamp_ms;
  }
  CHECK(a.reference.entries.back().end_ms == a.session_end_ms);
  CHECK(a.session_end_ms <= track_end_ms(a.track));
  for (const auto& f : a.track.frames) {
    double norm = 0.0;
    for (double v : f) norm += v * v;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SynthConfig impossible;
  impossible.num_speakers = 4;
  impossible.embedding_dim = 1;
  CHECK(kind_of([&] { synth_generate(impossible); }) == ErrorKind::GenerationFailure);
  SynthConfig too_few;
  too_few.num_speakers = 5;
  too_few.num_turns = 4;
  CHECK(kind_of([&] { synth_generate(too_few); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("a single-speaker session clusters to one speaker") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const SynthSession s = make_session(1, 40, 0.1, 1.0, seed);
    CHECK(s.events.empty());
    const auto batch = diarize_batch(s.events, s.track, 0, s.session_end_ms, {});
    CHECK(batch.result.num_speakers == 1);
  }
}

TEST_CASE("noise-free sessions are diarized without confusion") {
  for (std::uint64_t seed = 0; seed < 5; ++seed)
    CHECK(confusion(make_session(2 + static_cast<int>(seed % 3), 20, 0.0, 1.0, seed), {}) == 0.0);
}

TEST_CASE("constraints do not increase mean confusion on reliable turns") {
  for (double noise : {0.1, 0.2}) {
    double with = 0.0;
    double without = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const SynthSession s = make_session(4, 40, noise, 1.0, seed);
      StreamConfig on;
      StreamConfig off;
      off.clusterer.use_constraints = false;
      with += confusion(s, on);
      without += confusion(s, off);
    }
    CHECK(with <= without);
  }
}
