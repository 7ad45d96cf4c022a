#include "ttd/io.h"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ttd {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::IoError, "cannot read " + path);
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
}

namespace {

constexpr char kMagic[4] = {'T', 'T', 'D', 'E'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 4 + 8;

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::string_view data, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    value |= static_cast<T>(static_cast<unsigned char>(data[offset + i])) << (8 * i);
  return value;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    pos = s.find_first_not_of(" \t\r", pos);
    if (pos == std::string_view::npos) break;
    auto end = s.find_first_of(" \t\r", pos);
    if (end == std::string_view::npos) end = s.size();
    out.push_back(s.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) return std::nullopt;
  }
  return value;
}

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

// Shortest text that parses back to the same double.
std::string exact(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

FrameEmbeddingTrack parse_binary(std::string_view data) {
  if (data.size() < 4 || std::memcmp(data.data(), kMagic, 4) != 0) throw ParseError("bad magic", 0, std::nullopt);
  if (data.size() < kHeaderBytes) throw ParseError("truncated header", data.size(), std::nullopt);
  const auto version = get_le<std::uint32_t>(data, 4);
  if (version != kVersion) throw ParseError("unsupported version " + std::to_string(version), 4, std::nullopt);
  const auto dim = get_le<std::uint32_t>(data, 8);
  const auto period = get_le<std::uint32_t>(data, 12);
  const auto count = get_le<std::uint64_t>(data, 16);
  if (period == 0 || period > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
    throw ParseError("frame period must be positive", 12, std::nullopt);
  if (dim == 0 && count > 0) throw ParseError("zero dimension with frames", 8, std::nullopt);
  const std::uint64_t available = (data.size() - kHeaderBytes) / 4;
  if (dim != 0 && count > available / dim) {
    const std::uint64_t complete = available / dim;
    throw ParseError("truncated: header announces " + std::to_string(count) + " frames, file holds " +
                         std::to_string(complete),
                     data.size(), std::nullopt);
  }
  const std::uint64_t expected = kHeaderBytes + count * dim * 4;
  if (data.size() != expected) throw ParseError("trailing bytes after frame data", expected, std::nullopt);

  FrameEmbeddingTrack track;
  track.frame_period_ms = static_cast<int>(period);
  track.frames.assign(count, Embedding(dim));
  std::size_t offset = kHeaderBytes;
  for (auto& frame : track.frames) {
    for (double& x : frame) {
      const float f = std::bit_cast<float>(get_le<std::uint32_t>(data, offset));
      if (!std::isfinite(f)) throw ParseError("non-finite value", offset, std::nullopt);
      x = f;
      offset += 4;
    }
  }
  return track;
}

FrameEmbeddingTrack parse_jsonl(std::string_view text) {
  FrameEmbeddingTrack track;
  std::vector<std::int64_t> times;
  std::size_t line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), std::nullopt, line_no);
    }
    if (!j.is_object() || !j.contains("t_ms") || !j.contains("v") || !j["t_ms"].is_number_integer() ||
        !j["v"].is_array())
      throw ParseError(R"(expected {"t_ms": int, "v": [numbers]})", std::nullopt, line_no);
    Embedding v;
    v.reserve(j["v"].size());
    for (const auto& x : j["v"]) {
      if (!x.is_number()) throw ParseError("non-numeric vector entry", std::nullopt, line_no);
      const double d = x.get<double>();
      if (!std::isfinite(d)) throw ParseError("non-finite vector entry", std::nullopt, line_no);
      v.push_back(d);
    }
    if (v.empty()) throw ParseError("empty vector", std::nullopt, line_no);
    if (!track.frames.empty() && v.size() != track.frames.front().size()) {
      throw ParseError("dimension " + std::to_string(v.size()) + " differs from " +
                           std::to_string(track.frames.front().size()),
                       std::nullopt, line_no);
    }
    const auto t = j["t_ms"].get<std::int64_t>();
    if (times.empty() && t != 0) throw ParseError("first frame must start at t_ms = 0", std::nullopt, line_no);
    if (times.size() == 1) {
      if (t <= 0 || t > std::numeric_limits<int>::max())
        throw ParseError("frame times must increase", std::nullopt, line_no);
      track.frame_period_ms = static_cast<int>(t);
    } else if (times.size() > 1 && t != static_cast<std::int64_t>(times.size()) * track.frame_period_ms) {
      throw ParseError("frames must be evenly spaced by " + std::to_string(track.frame_period_ms) + " ms",
                       std::nullopt, line_no);
    }
    times.push_back(t);
    track.frames.push_back(std::move(v));
  }
  return track;
}

}  // namespace

FrameEmbeddingTrack parse_embeddings_bytes(std::string_view data) {
  const auto first = data.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && data[first] == '{') return parse_jsonl(data);
  return parse_binary(data);
}

FrameEmbeddingTrack parse_embeddings(const std::string& path) { return parse_embeddings_bytes(read_file(path)); }

std::string format_embeddings_binary(const FrameEmbeddingTrack& track) {
  const std::size_t dim = track.dim();
  for (const auto& f : track.frames)
    if (f.size() != dim) throw Error(ErrorKind::DimensionError, "frames differ in dimension");
  std::string out(kMagic, 4);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(track.frame_period_ms));
  put_le<std::uint64_t>(out, track.frames.size());
  out.reserve(out.size() + track.frames.size() * dim * 4);
  for (const auto& f : track.frames)
    for (double x : f) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
  return out;
}

std::string format_embeddings_jsonl(const FrameEmbeddingTrack& track) {
  std::string out;
  for (std::size_t i = 0; i < track.frames.size(); ++i) {
    nlohmann::json j;
    j["t_ms"] = static_cast<std::int64_t>(i) * track.frame_period_ms;
    j["v"] = track.frames[i];
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_embeddings(const FrameEmbeddingTrack& track, const std::string& path) {
  write_file(path, format_embeddings_binary(track));
}

std::vector<SpeakerTurnEvent> parse_turns_text(std::string_view text) {
  const auto lines = split_lines(text);
  std::size_t line_no = 0;
  bool header = false;
  std::size_t row = 0;
  std::vector<SpeakerTurnEvent> events;
  for (std::string_view raw : lines) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (!header) {
      std::string compact;
      for (char c : line)
        if (c != ' ' && c != '\t') compact.push_back(c);
      if (compact != "timestamp_ms,confidence")
        throw ParseError("expected header 'timestamp_ms,confidence'", std::nullopt, line_no);
      header = true;
      continue;
    }
    ++row;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
      throw ParseError("row " + std::to_string(row) + ": expected two fields", std::nullopt, line_no);
    const auto t = parse_number<std::int64_t>(line.substr(0, comma));
    const auto c = parse_number<double>(line.substr(comma + 1));
    if (!t || !c) throw ParseError("row " + std::to_string(row) + ": malformed number", std::nullopt, line_no);
    if (*c < 0.0 || *c > 1.0) {
      throw Error(ErrorKind::RangeError, "row " + std::to_string(row) + " (line " + std::to_string(line_no) +
                                             "): confidence " + exact(*c) + " outside [0, 1]");
    }
    if (!events.empty() && *t <= events.back().timestamp_ms) {
      throw Error(ErrorKind::OrderingError, "row " + std::to_string(row) + " (line " + std::to_string(line_no) +
                                                "): timestamp " + std::to_string(*t) + " not after " +
                                                std::to_string(events.back().timestamp_ms));
    }
    events.push_back({*t, *c});
  }
  if (!header && !events.empty()) throw ParseError("missing header", std::nullopt, 1);
  return events;
}

std::vector<SpeakerTurnEvent> parse_turns(const std::string& path) { return parse_turns_text(read_file(path)); }

std::string format_turns(const std::vector<SpeakerTurnEvent>& events) {
  std::string out = "timestamp_ms,confidence\n";
  for (const auto& e : events) out += std::to_string(e.timestamp_ms) + "," + exact(e.confidence) + "\n";
  return out;
}

void write_turns(const std::vector<SpeakerTurnEvent>& events, const std::string& path) {
  write_file(path, format_turns(events));
}

std::string format_rttm(const DiarizationTimeline& timeline) {
  std::string out;
  for (const auto& e : timeline.entries) {
    if (e.end_ms < e.start_ms) throw Error(ErrorKind::InvalidInput, "timeline entry ends before it starts");
    out += "SPEAKER " + timeline.session_id + " 1 " + fixed(e.start_ms / 1000.0, 3) + " " +
           fixed((e.end_ms - e.start_ms) / 1000.0, 3) + " <NA> <NA> " + e.speaker + " <NA> <NA>\n";
  }
  return out;
}

void emit_rttm(const DiarizationTimeline& timeline, const std::string& path) {
  write_file(path, format_rttm(timeline));
}

DiarizationTimeline parse_rttm_text(std::string_view text) {
  DiarizationTimeline timeline;
  bool have_session = false;
  std::size_t line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    const auto fields = split_ws(raw);
    if (fields.empty()) continue;
    if (fields.size() != 10 || fields[0] != "SPEAKER")
      throw ParseError("expected a 10-field SPEAKER line", std::nullopt, line_no);
    if (!have_session) {
      timeline.session_id = std::string(fields[1]);
      have_session = true;
    } else if (fields[1] != timeline.session_id) {
      throw ParseError("session id " + std::string(fields[1]) + " differs from " + timeline.session_id, std::nullopt,
                       line_no);
    }
    const auto start = parse_number<double>(fields[3]);
    const auto dur = parse_number<double>(fields[4]);
    if (!start || !dur || *start < 0.0 || *dur < 0.0)
      throw ParseError("bad onset or duration", std::nullopt, line_no);
    const auto start_ms = static_cast<std::int64_t>(std::llround(*start * 1000.0));
    const auto dur_ms = static_cast<std::int64_t>(std::llround(*dur * 1000.0));
    timeline.entries.push_back({start_ms, start_ms + dur_ms, std::string(fields[7])});
  }
  return timeline;
}

DiarizationTimeline parse_rttm(const std::string& path) { return parse_rttm_text(read_file(path)); }

namespace {

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorKind::InvalidParameter, "expected a boolean, got '" + std::string(v) + "'");
}

template <typename T>
T number(std::string_view key, std::string_view v) {
  const auto parsed = parse_number<T>(v);
  if (!parsed) throw Error(ErrorKind::InvalidParameter, std::string(key) + ": bad value '" + std::string(v) + "'");
  return *parsed;
}

}  // namespace

std::vector<std::string> config_keys() {
  return {"p_percentile",    "use_autotune",   "p_grid_start",     "p_grid_stop",  "p_grid_step",
          "use_constraints", "alpha",          "sigma_threshold",  "iter_tolerance", "max_iterations",
          "max_speakers",    "min_speakers",   "epsilon",          "single_speaker_gap", "laplacian",
          "blur_sigma",      "kmeans_seed",    "max_segment_ms",   "recluster_every"};
}

void apply_config_value(StreamConfig& cfg, std::string_view key, std::string_view value) {
  auto& c = cfg.clusterer;
  const std::string_view v = trim(value);
  if (key == "p_percentile") c.p_percentile = number<double>(key, v);
  else if (key == "use_autotune") c.use_autotune = parse_bool(v);
  else if (key == "p_grid_start") c.p_grid.start = number<double>(key, v);
  else if (key == "p_grid_stop") c.p_grid.stop = number<double>(key, v);
  else if (key == "p_grid_step") c.p_grid.step = number<double>(key, v);
  else if (key == "use_constraints") c.use_constraints = parse_bool(v);
  else if (key == "alpha") c.propagation.alpha = number<double>(key, v);
  else if (key == "sigma_threshold") c.propagation.sigma_threshold = number<double>(key, v);
  else if (key == "iter_tolerance") c.propagation.iter_tolerance = number<double>(key, v);
  else if (key == "max_iterations") c.propagation.max_iterations = number<int>(key, v);
  else if (key == "max_speakers") c.max_speakers = number<int>(key, v);
  else if (key == "min_speakers") c.min_speakers = number<int>(key, v);
  else if (key == "epsilon") c.epsilon = number<double>(key, v);
  else if (key == "single_speaker_gap") c.single_speaker_gap = number<double>(key, v);
  else if (key == "laplacian") {
    if (v == "normalized") c.laplacian = LaplacianType::Normalized;
    else if (v == "unnormalized") c.laplacian = LaplacianType::Unnormalized;
    else throw Error(ErrorKind::InvalidParameter, "laplacian must be normalized or unnormalized");
  } else if (key == "blur_sigma") c.blur_sigma = number<double>(key, v);
  else if (key == "kmeans_seed") c.kmeans_seed = RngSeed{number<std::uint64_t>(key, v)};
  else if (key == "max_segment_ms") cfg.max_segment_ms = number<std::int64_t>(key, v);
  else if (key == "recluster_every") cfg.recluster_every = number<int>(key, v);
  else throw Error(ErrorKind::InvalidParameter, "unknown config key '" + std::string(key) + "'");
}

StreamConfig parse_config_text(std::string_view text, StreamConfig base) {
  std::size_t line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", std::nullopt, line_no);
    const std::string_view key = trim(line.substr(0, eq));
    try {
      apply_config_value(base, key, line.substr(eq + 1));
    } catch (const Error& e) {
      throw ParseError(e.what(), std::nullopt, line_no);
    }
  }
  base.clusterer.validate();
  if (base.max_segment_ms <= 0 || base.recluster_every < 1)
    throw Error(ErrorKind::InvalidParameter, "max_segment_ms and recluster_every must be positive");
  return base;
}

StreamConfig parse_config(const std::string& path, StreamConfig base) {
  return parse_config_text(read_file(path), std::move(base));
}

std::string format_config(const StreamConfig& cfg) {
  const auto& c = cfg.clusterer;
  auto b = [](bool x) { return std::string(x ? "true" : "false"); };
  std::string out;
  auto line = [&](std::string_view k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
  line("p_percentile", exact(c.p_percentile));
  line("use_autotune", b(c.use_autotune));
  line("p_grid_start", exact(c.p_grid.start));
  line("p_grid_stop", exact(c.p_grid.stop));
  line("p_grid_step", exact(c.p_grid.step));
  line("use_constraints", b(c.use_constraints));
  line("alpha", exact(c.propagation.alpha));
  line("sigma_threshold", exact(c.propagation.sigma_threshold));
  line("iter_tolerance", exact(c.propagation.iter_tolerance));
  line("max_iterations", std::to_string(c.propagation.max_iterations));
  line("max_speakers", std::to_string(c.max_speakers));
  line("min_speakers", std::to_string(c.min_speakers));
  line("epsilon", exact(c.epsilon));
  line("single_speaker_gap", exact(c.single_speaker_gap));
  line("laplacian", c.laplacian == LaplacianType::Normalized ? "normalized" : "unnormalized");
  line("blur_sigma", exact(c.blur_sigma));
  line("kmeans_seed", std::to_string(c.kmeans_seed.value));
  line("max_segment_ms", std::to_string(cfg.max_segment_ms));
  line("recluster_every", std::to_string(cfg.recluster_every));
  return out;
}

std::string format_der_report(const DerReport& r) {
  std::string out;
  out += "DER " + fixed(r.der_pct, 2) + "\n";
  out += "false_alarm " + fixed(r.false_alarm_pct, 2) + "\n";
  out += "miss " + fixed(r.miss_pct, 2) + "\n";
  out += "confusion " + fixed(r.confusion_pct, 2) + "\n";
  out += "scored_s " + fixed(r.scored_ms / 1000.0, 3) + "\n";
  for (const auto& [hyp, ref] : r.mapping) out += "mapping " + hyp + " " + ref + "\n";
  return out;
}

std::string format_cost_report(const CostReport& r) {
  std::string out;
  out += "mode " + std::string(to_string(r.mode)) + "\n";
  out += "autotune " + std::string(r.autotune ? "true" : "false") + "\n";
  out += "constraints " + std::string(r.constraints ? "true" : "false") + "\n";
  out += "audio_minutes " + exact(r.audio_minutes) + "\n";
  out += "num_embeddings " + std::to_string(r.num_embeddings) + "\n";
  out += "measured_n " + std::to_string(r.measured_n) + "\n";
  out += "clustering_runs " + std::to_string(r.clustering_runs) + "\n";
  out += "decompositions_per_run " + std::to_string(r.decompositions_per_run) + "\n";
  out += "eig_flop_coefficient " + fixed(r.eig_flop_coefficient, 3) + "\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-24s %12s %14s  %s\n", "component", "gflop_per_s", "wall_time_s", "notes");
  out += buf;
  for (const auto& c : r.components) {
    std::string notes = c.stub ? "stub" : (c.extrapolated ? "extrapolated" : "measured");
    std::snprintf(buf, sizeof buf, "%-24s %12.4f %14.6f  %s\n", c.name.c_str(), c.gflops, c.wall_time_s,
                  notes.c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-24s %12.4f %14.6f\n", "total", r.total_gflops(), r.total_wall_time_s());
  out += buf;
  if (r.measured_n < r.num_embeddings) {
    out += "note: measured at N = " + std::to_string(r.measured_n) +
           "; wall times scaled to N = " + std::to_string(r.num_embeddings) +
           " (cubic for eigendecomposition and E2CP, quadratic for Laplacian & K-means)\n";
  }
  return out;
}

}  // namespace ttd
