#pragma once

#include <map>
#include <string>

#include "prism/core/types.hpp"

namespace prism {

using VerdictMap = std::map<std::string, Verdict, std::less<>>;

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold count of the class among scored ids
};

struct MetricReport {
  std::string name;
  std::size_t n = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  ClassMetrics harmful;
  ClassMetrics harmless;
  std::size_t n_failed = 0;
  std::size_t n_unscored_gold = 0;  // gold ids without a prediction
  std::string config_fingerprint;
};

// Per-class precision/recall/F1 with F1 = 0 when precision + recall = 0;
// macro-F1 is the plain mean of the two class F1 values. Every prediction id
// must be in `gold` (InputError otherwise); extra gold ids are only counted.
// Throws EmptyPredictions when there is nothing to score.
MetricReport score(const VerdictMap& predictions, const VerdictMap& gold);

}  // namespace prism
