#include "prism/backend/output_parsing.hpp"

#include <array>
#include <cctype>

#include "prism/core/text.hpp"
#include "prism/errors.hpp"

namespace prism {

namespace {

constexpr std::string_view kAnswerMarker = "answer:";
constexpr std::string_view kThoughtMarker = "thought:";
constexpr std::string_view kHarmless = "harmless";
constexpr std::string_view kHarmful = "harmful";

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

bool whole_word_at(std::string_view s, std::size_t pos, std::string_view word) {
  if (pos + word.size() > s.size()) return false;
  if (!text::starts_with_icase(s.substr(pos), word)) return false;
  const bool left_ok = pos == 0 || !is_alpha(s[pos - 1]);
  const bool right_ok = pos + word.size() == s.size() || !is_alpha(s[pos + word.size()]);
  return left_ok && right_ok;
}

// "harmless" is tested first at every position.
std::optional<Verdict> keyword_at(std::string_view s, std::size_t pos) {
  if (whole_word_at(s, pos, kHarmless)) return Verdict::Harmless;
  if (whole_word_at(s, pos, kHarmful)) return Verdict::Harmful;
  return std::nullopt;
}

std::optional<Verdict> first_keyword(std::string_view s) {
  for (std::size_t pos = 0; pos < s.size(); ++pos) {
    if (auto v = keyword_at(s, pos)) return v;
  }
  return std::nullopt;
}

std::optional<Verdict> last_keyword(std::string_view s) {
  for (std::size_t pos = s.size(); pos-- > 0;) {
    if (auto v = keyword_at(s, pos)) return v;
  }
  return std::nullopt;
}

// The token right after "Answer:", skipping decoration such as brackets,
// quotes and markdown emphasis; falls back to the first keyword anywhere in
// the answer section.
std::optional<Verdict> verdict_after_marker(std::string_view after) {
  std::size_t pos = 0;
  while (pos < after.size() &&
         (std::isspace(static_cast<unsigned char>(after[pos])) || std::string_view("[(\"'*`:").find(after[pos]) != std::string_view::npos)) {
    ++pos;
  }
  if (auto v = keyword_at(after, pos)) return v;
  return first_keyword(after);
}

}  // namespace

ParsedAnswer parse_answer(std::string_view raw) {
  const std::size_t answer_pos = text::rfind_icase(raw, kAnswerMarker);
  const std::size_t thought_pos = text::find_icase(raw, kThoughtMarker);

  std::optional<Verdict> verdict;
  if (answer_pos != std::string_view::npos) {
    verdict = verdict_after_marker(raw.substr(answer_pos + kAnswerMarker.size()));
  }
  if (!verdict) verdict = last_keyword(raw);
  if (!verdict) throw Unparseable("no harmful/harmless verdict in model output");

  ParsedAnswer out;
  out.verdict = *verdict;
  if (answer_pos != std::string_view::npos) {
    if (thought_pos != std::string_view::npos && thought_pos < answer_pos) {
      const std::size_t start = thought_pos + kThoughtMarker.size();
      out.thought = std::string(text::trim(raw.substr(start, answer_pos - start)));
    } else {
      out.thought = std::string(text::trim(raw.substr(0, answer_pos)));
    }
  } else if (thought_pos != std::string_view::npos) {
    out.thought = std::string(text::trim(raw.substr(thought_pos + kThoughtMarker.size())));
  } else {
    out.thought = std::string(text::trim(raw));
  }
  return out;
}

std::optional<Verdict> keyword_scan(std::string_view raw) {
  std::string lowered = text::to_lower(raw);
  bool harmless = false;
  for (std::size_t pos = lowered.find(kHarmless); pos != std::string::npos; pos = lowered.find(kHarmless, pos)) {
    harmless = true;
    lowered.replace(pos, kHarmless.size(), kHarmless.size(), ' ');
  }
  const bool harmful = lowered.find(kHarmful) != std::string::npos;
  if (harmless == harmful) return std::nullopt;
  return harmless ? Verdict::Harmless : Verdict::Harmful;
}

double non_printable_ratio(std::string_view s) {
  if (s.empty()) return 0.0;
  std::size_t bad = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
      if ((c < 0x20 && c != '\t' && c != '\n' && c != '\r') || c == 0x7F) ++bad;
      ++i;
      continue;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    }
    bool valid = len != 0 && i + len <= s.size();
    for (std::size_t k = 1; valid && k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) valid = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!valid) {
      ++bad;
      ++i;
      continue;
    }
    if (cp == 0xFFFD || (cp >= 0x80 && cp <= 0x9F)) bad += len;
    i += len;
  }
  return static_cast<double>(bad) / static_cast<double>(s.size());
}

std::string sanitize_rewrite(std::string_view raw, std::string_view fallback_text) {
  if (text::trim(fallback_text).empty()) {
    throw PreconditionError("sanitize_rewrite needs a non-blank fallback text");
  }
  static constexpr std::array<std::string_view, 4> kLabels = {"rewritten text:", "rewrite:", "output:", "text:"};
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 9> kWrappers = {{
      {"\"", "\""}, {"'", "'"}, {"`", "`"}, {"[", "]"}, {"(", ")"}, {"{", "}"},
      {"“", "”"}, {"‘", "’"}, {"«", "»"},
  }};

  std::string_view s = text::trim(raw);
  for (bool changed = true; changed && !s.empty();) {
    changed = false;
    for (auto label : kLabels) {
      if (text::starts_with_icase(s, label)) {
        s = text::trim(s.substr(label.size()));
        changed = true;
      }
    }
    for (const auto& [open, close] : kWrappers) {
      if (s.size() < open.size() + close.size() || !s.starts_with(open) || !s.ends_with(close)) continue;
      const std::string_view inner = s.substr(open.size(), s.size() - open.size() - close.size());
      // "(a) or (b)" is not wrapped.
      if (open != close &&
          (inner.find(open) != std::string_view::npos || inner.find(close) != std::string_view::npos)) {
        continue;
      }
      s = text::trim(inner);
      changed = true;
    }
  }

  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\n' || s[i] == '\r') {
      while (!out.empty() && (out.back() == ' ' || out.back() == '\t')) out.pop_back();
      while (i + 1 < s.size() && std::isspace(static_cast<unsigned char>(s[i + 1]))) ++i;
      out += ' ';
    } else {
      out += s[i];
    }
  }
  const std::string_view cleaned = text::trim(out);
  if (cleaned.empty() || non_printable_ratio(cleaned) > 0.10) return std::string(fallback_text);
  return std::string(cleaned);
}

}  // namespace prism
