#include "prism/orchestrator/trace.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "prism/errors.hpp"

namespace prism {

namespace {

using ojson = nlohmann::ordered_json;

// Shortest decimal that round-trips the float.
double float_for_json(float f) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, f);
  *res.ptr = '\0';
  return std::strtod(buf, nullptr);
}

template <typename T, typename F>
ojson optional_to_json(const std::optional<T>& v, F&& f) {
  return v ? f(*v) : ojson(nullptr);
}

ojson to_json(const EvidenceSet& e) {
  ojson hits = ojson::array();
  for (const auto& h : e.hits) hits.push_back({{"id", h.meme_id}, {"similarity", float_for_json(h.similarity)}});
  return {{"query_id", e.query_id}, {"hits", hits}};
}

ojson to_json(const VariantRecord& v) {
  return {{"variant", variant_suffix(v.variant)}, {"id", v.id}, {"text", v.text}, {"source", v.source}};
}

ojson to_json(const ProsecutionResult& p) {
  return {{"variant", variant_suffix(p.variant)},     {"verdict", to_string(p.verdict)},
          {"rationale", p.rationale},                 {"raw_output", p.raw_output},
          {"parse_fallback", p.parse_fallback},       {"attempts", p.attempts}};
}

ojson to_json(const InterpretationState& s) {
  ojson steps = ojson::array();
  for (const auto& st : s.steps) {
    steps.push_back({{"evidence_id", st.evidence_id},
                     {"similarity", float_for_json(st.similarity)},
                     {"rules", st.rules},
                     {"raw_output", st.raw_output},
                     {"marker_missing", st.marker_missing},
                     {"truncated", st.truncated}});
  }
  return {{"variant", variant_suffix(s.variant)}, {"rules", s.rules()}, {"steps", steps}};
}

template <typename T>
ojson list_to_json(const std::vector<T>& items) {
  ojson arr = ojson::array();
  for (const auto& item : items) arr.push_back(to_json(item));
  return arr;
}

template <typename T>
T field(const ojson& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("trace is missing '") + key + "'");
  return j.at(key).get<T>();
}

EvidenceSet evidence_from_json(const ojson& j) {
  EvidenceSet e;
  e.query_id = field<std::string>(j, "query_id");
  for (const auto& h : j.at("hits")) e.hits.push_back({field<std::string>(h, "id"), field<float>(h, "similarity")});
  return e;
}

VariantRecord variant_from_json(const ojson& j) {
  return {variant_from_suffix(field<std::string>(j, "variant")), field<std::string>(j, "id"),
          field<std::string>(j, "text"), field<std::string>(j, "source")};
}

ProsecutionResult prosecution_from_json(const ojson& j) {
  return {variant_from_suffix(field<std::string>(j, "variant")),
          verdict_from_string(field<std::string>(j, "verdict")),
          field<std::string>(j, "rationale"),
          field<std::string>(j, "raw_output"),
          field<bool>(j, "parse_fallback"),
          field<int>(j, "attempts")};
}

InterpretationState interpretation_from_json(const ojson& j) {
  InterpretationState s;
  s.variant = variant_from_suffix(field<std::string>(j, "variant"));
  for (const auto& st : j.at("steps")) {
    s.steps.push_back({field<std::string>(st, "evidence_id"), field<float>(st, "similarity"),
                       field<std::string>(st, "raw_output"), field<std::string>(st, "rules"),
                       field<bool>(st, "marker_missing"), field<bool>(st, "truncated")});
  }
  return s;
}

template <typename T, typename F>
std::optional<std::vector<T>> list_from_json(const ojson& j, const char* key, F&& f) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  std::vector<T> out;
  for (const auto& item : j.at(key)) out.push_back(f(item));
  return out;
}

bool present(const ojson& j, const char* key) { return j.contains(key) && !j.at(key).is_null(); }

}  // namespace

std::string_view to_string(CaseStatus s) noexcept { return s == CaseStatus::Ok ? "ok" : "failed"; }

std::string_view to_string(Decision d) noexcept {
  switch (d) {
    case Decision::Unanimous:
      return "unanimous";
    case Decision::Judge:
      return "judge";
    case Decision::Majority:
      return "majority";
    case Decision::Direct:
      return "direct";
  }
  return "unanimous";
}

const VariantRecord* CaseTrace::variant(VariantKind v) const noexcept {
  for (const auto& rec : variants) {
    if (rec.variant == v) return &rec;
  }
  return nullptr;
}

std::string trace_to_json_line(const CaseTrace& t) {
  ojson j;
  j["schema"] = kTraceSchemaVersion;
  j["meme_id"] = t.meme_id;
  j["status"] = to_string(t.status);
  j["failure"] = optional_to_json(t.failure, [](const CaseFailure& f) {
    return ojson{{"stage", f.stage}, {"error", f.error}};
  });
  j["image_ref"] = t.image_ref;
  j["variants"] = list_to_json(t.variants);
  j["rewrites"] = optional_to_json(t.rewrites, [](const auto& v) { return list_to_json(v); });
  j["evidence"] = optional_to_json(t.evidence, [](const std::vector<RetrievalRecord>& recs) {
    ojson arr = ojson::array();
    for (const auto& r : recs) {
      arr.push_back({{"variant", variant_suffix(r.variant)},
                     {"embedding_source", r.embedding_source},
                     {"query_id", r.evidence.query_id},
                     {"hits", to_json(r.evidence)["hits"]}});
    }
    return arr;
  });
  j["interpretations"] = optional_to_json(t.interpretations, [](const auto& v) { return list_to_json(v); });
  j["prosecutions"] = optional_to_json(t.prosecutions, [](const auto& v) { return list_to_json(v); });
  j["direct"] = optional_to_json(t.direct, [](const ProsecutionResult& p) { return to_json(p); });
  j["core_evidence"] = optional_to_json(t.core_evidence, [](const EvidenceSet& e) { return to_json(e); });
  j["core_representation"] = optional_to_json(t.core_representation, [](const std::string& s) { return ojson(s); });
  j["judge_output"] = optional_to_json(t.judge_output, [](const JudgeOutput& o) {
    return ojson{{"verdict", to_string(o.verdict)},
                 {"rationale", o.rationale},
                 {"raw_output", o.raw_output},
                 {"parse_fallback", o.parse_fallback},
                 {"attempts", o.attempts}};
  });
  j["final_verdict"] = optional_to_json(t.final_verdict, [](Verdict v) { return ojson(to_string(v)); });
  j["decision"] = optional_to_json(t.decision, [](Decision d) { return ojson(to_string(d)); });
  j["config_fingerprint"] = t.config_fingerprint;
  j["backend_calls"] = t.backend_calls;
  ojson timings = ojson::object();
  for (const auto& [stage, ms] : t.timings_ms) timings[stage] = ms;
  j["timings_ms"] = timings;
  return j.dump();
}

CaseTrace trace_from_json_line(std::string_view line) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const ojson::parse_error& e) {
    throw InputError(std::string("trace line is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object()) throw InputError("trace line must be a JSON object");
    if (field<int>(j, "schema") != kTraceSchemaVersion) {
      throw InputError("unsupported trace schema " + j.at("schema").dump());
    }
    CaseTrace t;
    t.meme_id = field<std::string>(j, "meme_id");
    const auto status = field<std::string>(j, "status");
    if (status != "ok" && status != "failed") throw InputError("invalid trace status '" + status + "'");
    t.status = status == "ok" ? CaseStatus::Ok : CaseStatus::Failed;
    if (present(j, "failure")) {
      t.failure = CaseFailure{field<std::string>(j["failure"], "stage"), field<std::string>(j["failure"], "error")};
    }
    t.image_ref = field<std::string>(j, "image_ref");
    t.variants = list_from_json<VariantRecord>(j, "variants", variant_from_json).value_or(std::vector<VariantRecord>{});
    t.rewrites = list_from_json<VariantRecord>(j, "rewrites", variant_from_json);
    t.evidence = list_from_json<RetrievalRecord>(j, "evidence", [](const ojson& r) {
      return RetrievalRecord{variant_from_suffix(field<std::string>(r, "variant")),
                             field<std::string>(r, "embedding_source"), evidence_from_json(r)};
    });
    t.interpretations = list_from_json<InterpretationState>(j, "interpretations", interpretation_from_json);
    t.prosecutions = list_from_json<ProsecutionResult>(j, "prosecutions", prosecution_from_json);
    if (present(j, "direct")) t.direct = prosecution_from_json(j["direct"]);
    if (present(j, "core_evidence")) t.core_evidence = evidence_from_json(j["core_evidence"]);
    if (present(j, "core_representation")) t.core_representation = field<std::string>(j, "core_representation");
    if (present(j, "judge_output")) {
      const auto& o = j["judge_output"];
      t.judge_output = JudgeOutput{verdict_from_string(field<std::string>(o, "verdict")),
                                   field<std::string>(o, "rationale"), field<std::string>(o, "raw_output"),
                                   field<bool>(o, "parse_fallback"), field<int>(o, "attempts")};
    }
    if (present(j, "final_verdict")) t.final_verdict = verdict_from_string(field<std::string>(j, "final_verdict"));
    if (present(j, "decision")) {
      const auto d = field<std::string>(j, "decision");
      bool known = false;
      for (Decision cand : {Decision::Unanimous, Decision::Judge, Decision::Majority, Decision::Direct}) {
        if (to_string(cand) == d) {
          t.decision = cand;
          known = true;
        }
      }
      if (!known) throw InputError("invalid decision '" + d + "'");
    }
    t.config_fingerprint = field<std::string>(j, "config_fingerprint");
    t.backend_calls = field<std::size_t>(j, "backend_calls");
    if (present(j, "timings_ms")) {
      for (const auto& [stage, ms] : j["timings_ms"].items()) t.timings_ms[stage] = ms.get<double>();
    }
    return t;
  } catch (const ojson::exception& e) {
    throw InputError(std::string("malformed trace: ") + e.what());
  }
}

std::string strip_timing_fields(std::string_view json_line) {
  auto j = ojson::parse(json_line);
  j.erase("timings_ms");
  return j.dump();
}

std::vector<CaseTrace> load_traces(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read trace file " + path.string());
  std::vector<CaseTrace> traces;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      traces.push_back(trace_from_json_line(line));
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return traces;
}

}  // namespace prism
