#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ttd/cost.h"
#include "ttd/der.h"
#include "ttd/io.h"
#include "ttd/pipeline.h"
#include "ttd/synth.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct SessionArgs {
  std::string embeddings;
  std::string turns;
  std::string out;
  std::string config;
  std::string session_id;
  std::vector<std::string> overrides;
  bool stream = false;
};

void add_session_options(CLI::App* cmd, SessionArgs& args) {
  cmd->add_option("--embeddings", args.embeddings, "Embedding track (TTDE binary or JSON lines)")->required();
  cmd->add_option("--turns", args.turns, "Speaker-turn events CSV")->required();
  cmd->add_option("--config", args.config, "key = value configuration file");
  cmd->add_option("--set", args.overrides, "Override a configuration key (key=value), repeatable");
  cmd->add_option("--session-id", args.session_id, "Session id written to RTTM (default: embeddings file stem)");
}

ttd::StreamConfig load_config(const SessionArgs& args) {
  ttd::StreamConfig cfg;
  if (!args.config.empty()) cfg = ttd::parse_config(args.config);
  std::string overrides;
  for (const auto& kv : args.overrides) {
    if (kv.find('=') == std::string::npos)
      throw ttd::Error(ttd::ErrorKind::InvalidParameter, "--set expects key=value, got '" + kv + "'");
    overrides += kv + "\n";
  }
  return ttd::parse_config_text(overrides, cfg);
}

struct Diarization {
  ttd::DiarizationTimeline timeline;
  ttd::ClusterResult result;
  std::size_t emissions = 0;
};

Diarization run_diarization(const SessionArgs& args, const ttd::StreamConfig& cfg) {
  const ttd::FrameEmbeddingTrack track = ttd::parse_embeddings(args.embeddings);
  const auto events = ttd::parse_turns(args.turns);
  const std::int64_t end_ms = ttd::track_end_ms(track);
  const std::string session =
      args.session_id.empty() ? std::filesystem::path(args.embeddings).stem().string() : args.session_id;

  Diarization d;
  if (args.stream) {
    ttd::StreamingDiarizer stream(track, 0, cfg);
    for (const auto& e : events) d.emissions += stream.push_event(e).size();
    d.emissions += stream.finish(end_ms).size();
    d.result = stream.last_result();
    d.timeline = ttd::labels_to_timeline(session, stream.segments(), d.result.labels);
  } else {
    const ttd::BatchResult batch = ttd::diarize_batch(events, track, 0, end_ms, cfg);
    d.result = batch.result;
    d.timeline = ttd::labels_to_timeline(session, batch.segmentation.segments, d.result.labels);
  }
  return d;
}

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, value);
  return buf;
}

void print_summary(const Diarization& d, std::ostream& os) {
  os << "segments " << d.result.labels.size() << "\n";
  os << "speakers " << d.result.num_speakers << "\n";
  os << "chosen_p " << fmt("%.2f", d.result.chosen_p) << "\n";
  os << "ratio " << fmt("%.6g", d.result.ratio) << "\n";
  os << "decompositions " << d.result.decompositions << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Turn-to-diarize: speaker diarization from speaker-turn events and embeddings"};
  app.require_subcommand(1);

  SessionArgs diarize_args;
  auto* diarize = app.add_subcommand("diarize", "Cluster a session and write RTTM");
  add_session_options(diarize, diarize_args);
  diarize->add_option("--out", diarize_args.out, "RTTM output path (default: stdout)");
  diarize->add_flag("--stream", diarize_args.stream, "Run the online diarizer and report its final labels");

  SessionArgs tune_args;
  auto* tune = app.add_subcommand("tune", "Diarize with auto-tune forced; print the chosen p and r(p)");
  add_session_options(tune, tune_args);

  std::string ref_path;
  std::string hyp_path;
  std::int64_t collar_ms = 0;
  auto* eval = app.add_subcommand("eval", "Score a hypothesis RTTM against a reference RTTM");
  eval->add_option("--ref", ref_path, "Reference RTTM")->required();
  eval->add_option("--hyp", hyp_path, "Hypothesis RTTM")->required();
  eval->add_option("--collar-ms", collar_ms, "Collar around reference boundaries")->check(CLI::NonNegativeNumber);

  ttd::SynthConfig synth_cfg;
  std::string out_dir;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic session");
  synth->add_option("--speakers", synth_cfg.num_speakers, "Number of speakers")->required();
  synth->add_option("--turns", synth_cfg.num_turns, "Number of turns")->required();
  synth->add_option("--seed", synth_cfg.seed, "Random seed")->required();
  synth->add_option("--out-dir", out_dir, "Output directory")->required();
  synth->add_option("--noise", synth_cfg.noise_std, "Per-dimension noise std")->capture_default_str();
  synth->add_option("--conf-quality", synth_cfg.turn_conf_quality, "Probability of a confident turn event")
      ->capture_default_str();
  synth->add_option("--dim", synth_cfg.embedding_dim, "Embedding dimension")->capture_default_str();
  synth->add_option("--session-id", synth_cfg.session_id, "Session id")->capture_default_str();

  std::string mode = "turn";
  double minutes = 0.0;
  bool autotune = false;
  bool no_constraints = false;
  ttd::CostAssumptions assumptions;
  auto* bench = app.add_subcommand("bench", "Measure clustering cost for a simulated session length");
  bench->add_option("--mode", mode, "dense or turn")->check(CLI::IsMember({"dense", "turn"}))->required();
  bench->add_option("--minutes", minutes, "Simulated audio minutes")->check(CLI::PositiveNumber)->required();
  bench->add_flag("--autotune", autotune, "Search the p grid (one decomposition per grid value)");
  bench->add_flag("--no-constraints", no_constraints, "Skip E2CP in turn mode");
  bench->add_option("--measure-cap", assumptions.measure_cap_n, "Largest N actually decomposed")
      ->capture_default_str();
  bench->add_option("--memory-cap", assumptions.memory_cap_n, "Refuse sessions with more embeddings")
      ->capture_default_str();
  bench->add_option("--repetitions", assumptions.repetitions, "Timed repetitions (median)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto used = app.get_subcommands();
    std::cerr << (used.empty() ? app.help() : used.front()->help());
    return kExitUsage;
  }

  try {
    if (*diarize) {
      const Diarization d = run_diarization(diarize_args, load_config(diarize_args));
      const std::string rttm = ttd::format_rttm(d.timeline);
      if (diarize_args.out.empty()) {
        std::cout << rttm;
      } else {
        ttd::write_file(diarize_args.out, rttm);
        print_summary(d, std::cout);
        if (diarize_args.stream) std::cout << "emissions " << d.emissions << "\n";
      }
    } else if (*tune) {
      ttd::StreamConfig cfg = load_config(tune_args);
      cfg.clusterer.use_autotune = true;
      cfg.clusterer.validate();
      print_summary(run_diarization(tune_args, cfg), std::cout);
    } else if (*eval) {
      const auto ref = ttd::parse_rttm(ref_path);
      const auto hyp = ttd::parse_rttm(hyp_path);
      std::cout << ttd::format_der_report(ttd::der(ref, hyp, collar_ms));
    } else if (*synth) {
      const ttd::SynthSession s = ttd::synth_generate(synth_cfg);
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path dir(out_dir);
      ttd::write_embeddings(s.track, (dir / (synth_cfg.session_id + ".ttde")).string());
      ttd::write_turns(s.events, (dir / (synth_cfg.session_id + ".turns.csv")).string());
      ttd::emit_rttm(s.reference, (dir / (synth_cfg.session_id + ".ref.rttm")).string());
      std::cout << "frames " << s.track.frames.size() << "\n";
      std::cout << "events " << s.events.size() << "\n";
      std::cout << "duration_s " << fmt("%.3f", static_cast<double>(s.session_end_ms) / 1000.0) << "\n";
    } else if (*bench) {
      const auto m = mode == "dense" ? ttd::CostMode::Dense : ttd::CostMode::Turn;
      try {
        std::cout << ttd::format_cost_report(ttd::cost_benchmark(minutes, m, autotune, assumptions, {}, !no_constraints));
      } catch (const ttd::CapExceededError& e) {
        std::cout << ttd::format_cost_report(e.partial());
        throw;
      }
    }
  } catch (const ttd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool usage = e.kind() == ttd::ErrorKind::ParseError || e.kind() == ttd::ErrorKind::InvalidParameter;
    return usage ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
