#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "prism/agents/template.hpp"
#include "prism/backend/backend.hpp"
#include "prism/orchestrator/trace.hpp"

namespace prism {

inline constexpr std::array<std::string_view, 5> kRubricDimensions = {
    "Faithfulness", "Inference Coherence", "Inference Depth", "Judgment Rationality", "Expression Clarity"};

struct RubricScore {
  std::array<float, 5> values{};  // in kRubricDimensions order, each in [0, 10]
  std::vector<std::string> clamped;  // dimensions whose raw value was out of range
  int attempts = 1;
  std::string raw_output;

  float faithfulness() const noexcept { return values[0]; }
  float inference_coherence() const noexcept { return values[1]; }
  float inference_depth() const noexcept { return values[2]; }
  float judgment_rationality() const noexcept { return values[3]; }
  float expression_clarity() const noexcept { return values[4]; }
};

// Reads "Name: value" pairs for the five dimensions (names case-insensitive,
// any layout). Throws Unparseable naming the missing dimensions.
RubricScore parse_rubric(std::string_view raw);

// The stage-wise reasoning of a trace as plain text, fed to the rubric prompt.
std::string render_reasoning_chain(const CaseTrace& trace);

// Scores one successful trace; the prompt needs a {reasoning_chain} slot.
// An unparseable reply is retried once. Throws PreconditionError for failed
// traces and Unparseable when the retry also misses a dimension.
RubricScore rubric_score(const CaseTrace& trace, Backend& backend, const PromptTemplate& rubric_prompt);

// `sample` distinct indices from [0, n) (all of them when sample >= n),
// chosen with a seeded mt19937_64 and returned in ascending order.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t sample, std::uint64_t seed);

// {"id": ..., "scores": {...}, "flags": [...]} on one line.
std::string rubric_to_json_line(std::string_view id, const RubricScore& score);

}  // namespace prism
