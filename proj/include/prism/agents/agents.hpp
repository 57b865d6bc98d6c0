#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prism/agents/prompts.hpp"
#include "prism/backend/backend.hpp"
#include "prism/core/manifest.hpp"
#include "prism/core/types.hpp"

namespace prism {

enum class Intent { Benevolent, Malicious };

inline constexpr std::size_t kMaxRules = 5;
// Fallback text for rewrites of memes that carry no text at all, so rewritten
// variants are never empty.
inline constexpr std::string_view kNoTextMarker = "[no text]";

// Analyst: rewrites the meme text under an assumed disseminator intent. The
// image is untouched; the returned meme carries the variant id.
Meme analyst_rewrite(const Meme& meme, Intent intent, const PromptSet& prompts, Backend& backend);

struct InterpretationStep {
  std::string evidence_id;
  float similarity = 0.0f;
  std::string raw_output;
  std::string rules;  // rules after this step (O_i)
  bool marker_missing = false;
  bool truncated = false;  // more than kMaxRules items were cut
};

// Rules accumulated over the evidence chain for one variant. Rules start out
// empty and each evidence item adds one step.
struct InterpretationState {
  VariantKind variant = VariantKind::Original;
  std::vector<InterpretationStep> steps;

  std::size_t step() const noexcept { return steps.size(); }
  // Rules after the last step; empty before the first.
  const std::string& rules() const noexcept;
};

// Investigator: walks the evidence most-similar first, feeding each evidence
// meme and the current rules to the model and taking the "Updated rules:"
// section of the reply as the new rules. A reply without that section keeps
// the previous rules and flags the step. Issues exactly one call per hit.
InterpretationState investigate(VariantKind variant, const EvidenceSet& evidence, const MemeCatalog& corpus,
                                const PromptSet& prompts, Backend& backend);

// Text after the last "Updated rules:" marker, trimmed and capped at
// kMaxRules numbered items. Returns nullopt when the marker is missing.
struct ExtractedRules {
  std::string text;
  bool truncated = false;
};
std::optional<ExtractedRules> extract_updated_rules(std::string_view raw);
// Cuts numbered rule lists ("1. ...", "2) ...") after `max_items` items.
ExtractedRules cap_rules(std::string_view rules, std::size_t max_items);

// Prosecutor: judges the ORIGINAL meme with one variant's interpretation as
// the note. Unparseable output is retried once, then keyword-scanned, then
// recorded as Harmless with parse_fallback set.
ProsecutionResult prosecute(const Meme& original, std::string_view interpretation, VariantKind variant,
                            const PromptSet& prompts, Backend& backend);

// Single-shot classification of the original meme, used when the prosecutor
// stage is ablated.
ProsecutionResult direct_classify(const Meme& original, const PromptSet& prompts, Backend& backend);

// Core representation: one call with the original meme and all of its
// core evidence memes (text and image), returning the model's summary.
std::string core_representation(const Meme& original, const EvidenceSet& core_evidence, const MemeCatalog& corpus,
                                 const PromptSet& prompts, Backend& backend);

// Judge: arbitrates between the reference prosecution and the dissenting
// ones. Throws PreconditionError when `dissents` is empty.
JudgeOutput judge(const Meme& original, const ProsecutionResult& reference,
                  std::span<const ProsecutionResult> dissents, std::string_view core,
                  const PromptSet& prompts, Backend& backend);

// The prompt text the judge would receive; exposed for tests and inspection.
std::string render_judge_prompt(const Meme& original, const ProsecutionResult& reference,
                                std::span<const ProsecutionResult> dissents, std::string_view core,
                                const PromptSet& prompts);

}  // namespace prism
