#include "prism/evaluation/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "prism/errors.hpp"

namespace prism {

namespace {

using ojson = nlohmann::ordered_json;

std::string pct(double v) { return fmt::format("{:.2f}", v * 100.0); }

ojson class_json(const ClassMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
}

}  // namespace

std::string format_delta_pp(double from, double to) {
  double d = std::round((to - from) * 10000.0) / 100.0;
  d += 0.0;  // no "-0.00"
  return fmt::format("{:+.2f}", d);
}

TracePredictions collect_predictions(const std::vector<CaseTrace>& traces) {
  TracePredictions out;
  std::set<std::string, std::less<>> seen;
  std::set<std::string, std::less<>> failed;
  std::vector<std::string> fingerprints;
  for (const auto& t : traces) {
    if (!seen.insert(t.meme_id).second) ++out.n_duplicates;
    if (t.status == CaseStatus::Ok && t.final_verdict) {
      out.predictions[t.meme_id] = *t.final_verdict;
      failed.erase(t.meme_id);
    } else {
      out.predictions.erase(t.meme_id);
      failed.insert(t.meme_id);
    }
    if (std::find(fingerprints.begin(), fingerprints.end(), t.config_fingerprint) == fingerprints.end()) {
      fingerprints.push_back(t.config_fingerprint);
    }
  }
  out.failed_ids.assign(failed.begin(), failed.end());
  out.config_fingerprint = fmt::format("{}", fmt::join(fingerprints, " | "));
  return out;
}

MetricReport evaluate_traces(const std::vector<CaseTrace>& traces, const Manifest& manifest, LabelScheme scheme,
                             std::string name) {
  const auto collected = collect_predictions(traces);
  VerdictMap gold;
  for (const auto& [id, v] : manifest.gold(scheme)) gold.emplace(id, v);

  MetricReport r = score(collected.predictions, gold);
  r.name = std::move(name);
  r.n_failed = collected.failed_ids.size();
  r.n_unscored_gold -= std::min(r.n_unscored_gold, static_cast<std::size_t>(std::count_if(
                                                       collected.failed_ids.begin(), collected.failed_ids.end(),
                                                       [&](const std::string& id) { return gold.contains(id); })));
  r.config_fingerprint = collected.config_fingerprint;
  return r;
}

Comparison compare_reports(std::span<const MetricReport> reports) {
  const std::vector<std::string> header = {"config", "n", "failed", "accuracy", "macro_f1", "d_acc", "d_f1",
                                           "fingerprint"};
  std::vector<std::vector<std::string>> rows;
  ojson sidecar;
  sidecar["reports"] = ojson::array();

  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const bool has_delta = i > 0;
    const auto d_acc = has_delta ? format_delta_pp(reports[0].accuracy, r.accuracy) : std::string();
    const auto d_f1 = has_delta ? format_delta_pp(reports[0].macro_f1, r.macro_f1) : std::string();
    rows.push_back({r.name, std::to_string(r.n), std::to_string(r.n_failed), pct(r.accuracy), pct(r.macro_f1), d_acc,
                    d_f1, r.config_fingerprint});

    ojson j;
    j["name"] = r.name;
    j["n"] = r.n;
    j["n_failed"] = r.n_failed;
    j["n_unscored_gold"] = r.n_unscored_gold;
    j["accuracy"] = r.accuracy;
    j["macro_f1"] = r.macro_f1;
    j["per_class"] = {{"harmful", class_json(r.harmful)}, {"harmless", class_json(r.harmless)}};
    j["config_fingerprint"] = r.config_fingerprint;
    j["delta_pp"] = has_delta ? ojson{{"accuracy", d_acc}, {"macro_f1", d_f1}} : ojson(nullptr);
    sidecar["reports"].push_back(j);
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  auto render_row = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const bool last = c + 1 == cells.size();
      const bool numeric = c > 0 && !last;
      if (numeric) {
        line += fmt::format("{:>{}}", cells[c], width[c]);
      } else {
        line += last ? cells[c] : fmt::format("{:<{}}", cells[c], width[c]);
      }
      if (!last) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    return line + "\n";
  };

  Comparison out;
  out.table = render_row(header);
  for (const auto& row : rows) out.table += render_row(row);
  out.json = sidecar.dump(2) + "\n";
  return out;
}

}  // namespace prism
