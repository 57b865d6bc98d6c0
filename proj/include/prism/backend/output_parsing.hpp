#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "prism/core/types.hpp"

namespace prism {

struct ParsedAnswer {
  Verdict verdict = Verdict::Harmless;
  std::string thought;
};

// Parses "Thought: ... Answer: harmful|harmless" style output.
//
// The verdict comes from the text after the last "Answer:" (case-insensitive);
// without a usable marker the whole output is scanned and the last whole-word
// "harmless"/"harmful" wins. The thought is the span between "Thought:" and
// the last "Answer:", the text before "Answer:" when there is no "Thought:",
// or the whole output when neither marker is present.
//
// Throws Unparseable when no verdict keyword appears at all.
ParsedAnswer parse_answer(std::string_view raw);

// Last-resort substring scan used after a parse retry failed. Returns a
// verdict only when exactly one of the two stems ("harmless", "harmful")
// occurs; "harmless" is removed before looking for "harmful".
std::optional<Verdict> keyword_scan(std::string_view raw);

// Minimal cleanup of a rewrite: drops leading "rewrite:", "rewritten text:",
// "output:", "text:" labels, wrapping quotes or brackets, folds newlines into
// spaces and trims. Empty or garbled results (more than 10% non-printable
// bytes) yield `fallback_text`. Never returns an empty string.
// Throws PreconditionError when fallback_text is blank.
std::string sanitize_rewrite(std::string_view raw, std::string_view fallback_text);

// Fraction of bytes that are control characters, invalid UTF-8, or part of a
// U+FFFD replacement character.
double non_printable_ratio(std::string_view s);

}  // namespace prism
