#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ttd/pipeline.h"

namespace ttd {

struct DerReport {
  double false_alarm_pct = 0.0;
  double miss_pct = 0.0;
  double confusion_pct = 0.0;
  double der_pct = 0.0;
  double scored_ms = 0.0;                     // total reference speech inside the scored region
  std::map<std::string, std::string> mapping;  // hypothesis label -> reference label
};

// Optimal one-to-one assignment maximizing total weight; weights[r][c] >= 0.
// Returns, for every row, the assigned column or -1.
std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weights);

// Diarization error rate. Reference speakers may overlap; each active speaker
// counts towards the scored duration. A collar of `collar_ms` around every
// reference boundary is excluded from scoring.
DerReport der(const DiarizationTimeline& reference, const DiarizationTimeline& hypothesis, std::int64_t collar_ms = 0);

}  // namespace ttd
