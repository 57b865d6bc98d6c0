#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prism/agents/agents.hpp"
#include "prism/core/types.hpp"

namespace prism {

inline constexpr int kTraceSchemaVersion = 1;

enum class CaseStatus { Ok, Failed };

// How the final verdict was reached.
enum class Decision { Unanimous, Judge, Majority, Direct };

std::string_view to_string(CaseStatus s) noexcept;
std::string_view to_string(Decision d) noexcept;

struct VariantRecord {
  VariantKind variant = VariantKind::Original;
  std::string id;  // <meme id>#ori|#b|#m
  std::string text;
  // "input" for the original, "analyst" for a fresh rewrite, "file" when the
  // rewrite was reused from an earlier --rewrites-only pass.
  std::string source;
};

struct RetrievalRecord {
  VariantKind variant = VariantKind::Original;
  // Which embedding the query used: "variant" (a per-variant record),
  // "original" (the meme's own query record) or "index" (its index entry).
  std::string embedding_source;
  EvidenceSet evidence;
};

struct CaseFailure {
  std::string stage;
  std::string error;
};

// Complete stage-wise record of one meme. Fields of disabled stages stay
// empty (null in JSON); enabled stages always fill theirs.
struct CaseTrace {
  std::string meme_id;
  CaseStatus status = CaseStatus::Ok;
  std::optional<CaseFailure> failure;
  std::string image_ref;
  std::vector<VariantRecord> variants;
  std::optional<std::vector<VariantRecord>> rewrites;             // analyst
  std::optional<std::vector<RetrievalRecord>> evidence;           // investigator
  std::optional<std::vector<InterpretationState>> interpretations;  // investigator
  std::optional<std::vector<ProsecutionResult>> prosecutions;     // prosecutor
  std::optional<ProsecutionResult> direct;                        // prosecutor ablated
  std::optional<EvidenceSet> core_evidence;                       // judge, on disagreement
  std::optional<std::string> core_representation;
  std::optional<JudgeOutput> judge_output;
  std::optional<Verdict> final_verdict;
  std::optional<Decision> decision;
  std::string config_fingerprint;
  std::size_t backend_calls = 0;
  std::map<std::string, double> timings_ms;

  const VariantRecord* variant(VariantKind v) const noexcept;
};

// One JSON object per line, keys in a fixed order, starting with "schema".
std::string trace_to_json_line(const CaseTrace& trace);
// Throws InputError on malformed JSON or an unsupported schema version.
CaseTrace trace_from_json_line(std::string_view line);

// Drops the "timings_ms" member, the only field that differs between two
// runs over the same inputs.
std::string strip_timing_fields(std::string_view json_line);

// Reads a trace file, skipping blank lines. Throws InputError naming the line.
std::vector<CaseTrace> load_traces(const std::filesystem::path& path);

}  // namespace prism
