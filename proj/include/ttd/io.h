#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ttd/cost.h"
#include "ttd/der.h"
#include "ttd/error.h"
#include "ttd/pipeline.h"

namespace ttd {

// Parse failures carry where they happened: a byte offset for binary input,
// a 1-based line number for text input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::optional<std::uint64_t> byte_offset, std::optional<std::size_t> line)
      : Error(ErrorKind::ParseError, what + location(byte_offset, line)), byte_offset_(byte_offset), line_(line) {}

  std::optional<std::uint64_t> byte_offset() const noexcept { return byte_offset_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  static std::string location(std::optional<std::uint64_t> byte_offset, std::optional<std::size_t> line) {
    if (byte_offset) return " (at byte " + std::to_string(*byte_offset) + ")";
    if (line) return " (at line " + std::to_string(*line) + ")";
    return "";
  }
  std::optional<std::uint64_t> byte_offset_;
  std::optional<std::size_t> line_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Embedding tracks. Binary: "TTDE", u32 version 1, u32 dim, u32 frame_period_ms,
// u64 count, then count * dim little-endian float32. Text: one JSON object per
// line, {"t_ms": <int>, "v": [...]}, frames evenly spaced from t_ms = 0.
// The form is picked from the leading byte.
FrameEmbeddingTrack parse_embeddings_bytes(std::string_view data);
FrameEmbeddingTrack parse_embeddings(const std::string& path);
std::string format_embeddings_binary(const FrameEmbeddingTrack& track);
std::string format_embeddings_jsonl(const FrameEmbeddingTrack& track);
void write_embeddings(const FrameEmbeddingTrack& track, const std::string& path);

// Turn events: CSV with header "timestamp_ms,confidence", strictly ascending.
std::vector<SpeakerTurnEvent> parse_turns_text(std::string_view text);
std::vector<SpeakerTurnEvent> parse_turns(const std::string& path);
std::string format_turns(const std::vector<SpeakerTurnEvent>& events);
void write_turns(const std::vector<SpeakerTurnEvent>& events, const std::string& path);

std::string format_rttm(const DiarizationTimeline& timeline);
void emit_rttm(const DiarizationTimeline& timeline, const std::string& path);
DiarizationTimeline parse_rttm_text(std::string_view text);
DiarizationTimeline parse_rttm(const std::string& path);

// Flat "key = value" configuration; '#' starts a comment.
void apply_config_value(StreamConfig& cfg, std::string_view key, std::string_view value);
StreamConfig parse_config_text(std::string_view text, StreamConfig base = {});
StreamConfig parse_config(const std::string& path, StreamConfig base = {});
std::string format_config(const StreamConfig& cfg);
std::vector<std::string> config_keys();

std::string format_der_report(const DerReport& report);
std::string format_cost_report(const CostReport& report);

}  // namespace ttd
