#include "prism/evaluation/metrics.hpp"

#include "prism/errors.hpp"

namespace prism {

namespace {

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassMetrics m;
  m.support = tp + fn;
  m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

}  // namespace

MetricReport score(const VerdictMap& predictions, const VerdictMap& gold) {
  if (predictions.empty()) throw EmptyPredictions();

  // confusion[gold][pred], index 0 = harmful
  std::size_t confusion[2][2] = {{0, 0}, {0, 0}};
  for (const auto& [id, pred] : predictions) {
    auto it = gold.find(id);
    if (it == gold.end()) throw InputError("prediction for '" + id + "' has no gold label");
    const int g = it->second == Verdict::Harmful ? 0 : 1;
    const int p = pred == Verdict::Harmful ? 0 : 1;
    ++confusion[g][p];
  }

  MetricReport r;
  r.n = predictions.size();
  r.n_unscored_gold = gold.size() - predictions.size();
  r.accuracy = static_cast<double>(confusion[0][0] + confusion[1][1]) / static_cast<double>(r.n);
  r.harmful = class_metrics(confusion[0][0], confusion[1][0], confusion[0][1]);
  r.harmless = class_metrics(confusion[1][1], confusion[0][1], confusion[1][0]);
  r.macro_f1 = (r.harmful.f1 + r.harmless.f1) / 2.0;
  return r;
}

}  // namespace prism
