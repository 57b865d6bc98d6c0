#pragma once

#include <span>
#include <string>
#include <vector>

#include "prism/core/labels.hpp"
#include "prism/core/manifest.hpp"
#include "prism/evaluation/metrics.hpp"
#include "prism/orchestrator/trace.hpp"

namespace prism {

struct TracePredictions {
  VerdictMap predictions;
  std::vector<std::string> failed_ids;
  // Lines for an id seen earlier in the file (a resumed run re-executed the
  // case); the later line wins.
  std::size_t n_duplicates = 0;
  // The shared fingerprint, or every distinct one joined with " | ".
  std::string config_fingerprint;
};

TracePredictions collect_predictions(const std::vector<CaseTrace>& traces);

// Scores the successful traces against the manifest's gold labels; failed
// cases are reported in n_failed, not scored.
MetricReport evaluate_traces(const std::vector<CaseTrace>& traces, const Manifest& manifest, LabelScheme scheme,
                             std::string name = "run");

struct Comparison {
  std::string table;  // aligned text, one row per report
  std::string json;   // machine-readable sidecar with the same numbers
};

// Rows keep the input order; deltas are in percentage points against the
// first row, e.g. "+10.00".
Comparison compare_reports(std::span<const MetricReport> reports);

// Signed percentage-point difference with two decimals.
std::string format_delta_pp(double from, double to);

}  // namespace prism
