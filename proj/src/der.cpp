#include "ttd/der.h"

#include <algorithm>
#include <limits>
#include <set>

#include "ttd/error.h"

namespace ttd {

std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weights) {
  const std::size_t rows = weights.size();
  const std::size_t cols = rows == 0 ? 0 : weights.front().size();
  const std::size_t n = std::max(rows, cols);
  if (n == 0) return {};

  // Hungarian algorithm (shortest augmenting paths with potentials) on the
  // square cost matrix -weight, padded with zeros.
  double top = 0.0;
  for (const auto& r : weights) {
    if (r.size() != cols) throw Error(ErrorKind::DimensionError, "ragged weight matrix");
    for (double w : r) top = std::max(top, w);
  }
  auto cost = [&](std::size_t i, std::size_t j) {
    return (i < rows && j < cols) ? top - weights[i][j] : top;
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);  // match[col] = row, 1-based
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> out(rows, -1);
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = match[j];
    if (i >= 1 && i - 1 < rows && j - 1 < cols) out[i - 1] = static_cast<int>(j - 1);
  }
  return out;
}

namespace {

std::vector<std::string> speakers_of(const DiarizationTimeline& t) {
  std::set<std::string> s;
  for (const auto& e : t.entries) {
    if (e.end_ms < e.start_ms) throw Error(ErrorKind::InvalidInput, "timeline entry ends before it starts");
    s.insert(e.speaker);
  }
  return {s.begin(), s.end()};
}

std::size_t index_of(const std::vector<std::string>& names, const std::string& name) {
  return static_cast<std::size_t>(std::lower_bound(names.begin(), names.end(), name) - names.begin());
}

}  // namespace

DerReport der(const DiarizationTimeline& reference, const DiarizationTimeline& hypothesis, std::int64_t collar_ms) {
  if (collar_ms < 0) throw Error(ErrorKind::InvalidParameter, "collar must be >= 0");
  const auto ref_names = speakers_of(reference);
  const auto hyp_names = speakers_of(hypothesis);

  // Elementary intervals between every boundary of either timeline and of the
  // collar zones.
  std::vector<std::int64_t> cuts;
  std::vector<std::pair<std::int64_t, std::int64_t>> excluded;
  for (const auto& e : reference.entries) {
    for (std::int64_t b : {e.start_ms, e.end_ms}) {
      cuts.push_back(b);
      if (collar_ms > 0) {
        excluded.emplace_back(b - collar_ms, b + collar_ms);
        cuts.push_back(b - collar_ms);
        cuts.push_back(b + collar_ms);
      }
    }
  }
  for (const auto& e : hypothesis.entries) {
    cuts.push_back(e.start_ms);
    cuts.push_back(e.end_ms);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  struct Piece {
    double duration;
    std::vector<std::size_t> ref;
    std::vector<std::size_t> hyp;
  };
  std::vector<Piece> pieces;
  std::vector<std::vector<double>> overlap(hyp_names.size(), std::vector<double>(ref_names.size(), 0.0));
  double scored = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const std::int64_t lo = cuts[c];
    const std::int64_t hi = cuts[c + 1];
    const bool skip = std::any_of(excluded.begin(), excluded.end(),
                                  [&](const auto& z) { return lo >= z.first && hi <= z.second; });
    if (skip) continue;
    Piece p{static_cast<double>(hi - lo), {}, {}};
    for (const auto& e : reference.entries)
      if (e.start_ms <= lo && hi <= e.end_ms) p.ref.push_back(index_of(ref_names, e.speaker));
    for (const auto& e : hypothesis.entries)
      if (e.start_ms <= lo && hi <= e.end_ms) p.hyp.push_back(index_of(hyp_names, e.speaker));
    std::sort(p.ref.begin(), p.ref.end());
    p.ref.erase(std::unique(p.ref.begin(), p.ref.end()), p.ref.end());
    std::sort(p.hyp.begin(), p.hyp.end());
    p.hyp.erase(std::unique(p.hyp.begin(), p.hyp.end()), p.hyp.end());
    if (p.ref.empty() && p.hyp.empty()) continue;
    for (std::size_t h : p.hyp)
      for (std::size_t r : p.ref) overlap[h][r] += p.duration;
    scored += p.duration * static_cast<double>(p.ref.size());
    pieces.push_back(std::move(p));
  }
  if (!(scored > 0.0)) throw Error(ErrorKind::UndefinedMetric, "reference contains no scored speech");

  const std::vector<int> assignment = max_weight_assignment(overlap);
  DerReport report;
  report.scored_ms = scored;
  for (std::size_t h = 0; h < hyp_names.size(); ++h) {
    if (assignment[h] >= 0) report.mapping[hyp_names[h]] = ref_names[static_cast<std::size_t>(assignment[h])];
  }

  double false_alarm = 0.0;
  double miss = 0.0;
  double confusion = 0.0;
  for (const Piece& p : pieces) {
    const auto n_ref = static_cast<double>(p.ref.size());
    const auto n_hyp = static_cast<double>(p.hyp.size());
    double correct = 0.0;
    for (std::size_t h : p.hyp) {
      const int r = assignment[h];
      if (r >= 0 && std::binary_search(p.ref.begin(), p.ref.end(), static_cast<std::size_t>(r))) correct += 1.0;
    }
    false_alarm += p.duration * std::max(0.0, n_hyp - n_ref);
    miss += p.duration * std::max(0.0, n_ref - n_hyp);
    confusion += p.duration * (std::min(n_ref, n_hyp) - correct);
  }
  report.false_alarm_pct = 100.0 * false_alarm / scored;
  report.miss_pct = 100.0 * miss / scored;
  report.confusion_pct = 100.0 * confusion / scored;
  report.der_pct = report.false_alarm_pct + report.miss_pct + report.confusion_pct;
  return report;
}

}  // namespace ttd
