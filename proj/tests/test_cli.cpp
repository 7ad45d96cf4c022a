#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "ttd/io.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(TTD_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("synthesize, diarize and score a clean session") {
  TempDir dir("ttd_cli_clean");
  const auto synth = run("synth --speakers 3 --turns 30 --seed 4 --noise 0 --session-id s1 --out-dir " + dir.path.string());
  REQUIRE(synth.status == 0);
  REQUIRE(fs::exists(dir / "s1.ttde"));
  REQUIRE(fs::exists(dir / "s1.turns.csv"));
  REQUIRE(fs::exists(dir / "s1.ref.rttm"));

  const auto diarize = run("diarize --embeddings " + (dir / "s1.ttde") + " --turns " + (dir / "s1.turns.csv") +
                           " --out " + (dir / "s1.hyp.rttm"));
  REQUIRE(diarize.status == 0);
  const auto hyp = ttd::parse_rttm(dir / "s1.hyp.rttm");
  CHECK(hyp.session_id == "s1");
  CHECK_FALSE(hyp.entries.empty());

  const auto eval = run("eval --ref " + (dir / "s1.ref.rttm") + " --hyp " + (dir / "s1.hyp.rttm"));
  REQUIRE(eval.status == 0);
  CHECK(eval.out.find("DER 0.00") != std::string::npos);

  const auto stream = run("diarize --stream --embeddings " + (dir / "s1.ttde") + " --turns " +
                          (dir / "s1.turns.csv") + " --out " + (dir / "s1.stream.rttm"));
  REQUIRE(stream.status == 0);
  CHECK(ttd::read_file(dir / "s1.stream.rttm") == ttd::read_file(dir / "s1.hyp.rttm"));

  const auto self = run("eval --ref " + (dir / "s1.ref.rttm") + " --hyp " + (dir / "s1.ref.rttm"));
  CHECK(self.out.find("DER 0.00") != std::string::npos);
}

TEST_CASE("configuration overrides reach the clusterer") {
  TempDir dir("ttd_cli_config");
  REQUIRE(run("synth --speakers 2 --turns 20 --seed 5 --session-id s --out-dir " + dir.path.string()).status == 0);
  ttd::write_file(dir / "c.cfg", "use_autotune = false\np_percentile = 0.9\n");
  const auto r = run("tune --embeddings " + (dir / "s.ttde") + " --turns " + (dir / "s.turns.csv") + " --config " +
                     (dir / "c.cfg"));
  REQUIRE(r.status == 0);
  CHECK(r.out.find("chosen_p") != std::string::npos);
  const auto bad = run("diarize --embeddings " + (dir / "s.ttde") + " --turns " + (dir / "s.turns.csv") +
                       " --set nonsense=1");
  CHECK(bad.status == 2);
}

TEST_CASE("usage errors exit with status 2") {
  const auto missing = run("diarize --embeddings x.ttde");
  CHECK(missing.status == 2);
  CHECK(missing.out.find("--turns") != std::string::npos);
  CHECK(run("eval --ref a --hyp b --bogus").status == 2);
  CHECK(run("bench --mode sparse --minutes 1").status == 2);
}

TEST_CASE("runtime failures exit with status 3") {
  TempDir dir("ttd_cli_runtime");
  CHECK(run("eval --ref " + (dir / "nope.rttm") + " --hyp " + (dir / "nope.rttm")).status == 3);
  ttd::write_file(dir / "empty.rttm", "");
  CHECK(run("eval --ref " + (dir / "empty.rttm") + " --hyp " + (dir / "empty.rttm")).status == 3);
}

TEST_CASE("malformed input exits with status 2 and names the location") {
  TempDir dir("ttd_cli_parse");
  ttd::write_file(dir / "bad.ttde", "XXXX0000000000000000000000");
  ttd::write_file(dir / "t.csv", "timestamp_ms,confidence\n");
  const auto r = run("diarize --embeddings " + (dir / "bad.ttde") + " --turns " + (dir / "t.csv"));
  CHECK(r.status == 2);
  CHECK(r.out.find("byte 0") != std::string::npos);
}

TEST_CASE("bench prints a cost table") {
  const auto r = run("bench --mode turn --minutes 1 --repetitions 1");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("speaker_turn_detection") != std::string::npos);
  CHECK(r.out.find("eigendecomposition") != std::string::npos);
  const auto capped = run("bench --mode dense --minutes 60 --memory-cap 1000");
  CHECK(capped.status == 3);
  CHECK(capped.out.find("speaker_encoder") != std::string::npos);
}
