#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prism {

enum class Verdict { Harmful, Harmless };

// Which reading of a meme a record belongs to: the original text or one of
// the two intent-conditioned rewrites.
enum class VariantKind { Original, Benevolent, Malicious };

inline constexpr std::array<VariantKind, 3> kAllVariants = {
    VariantKind::Original, VariantKind::Benevolent, VariantKind::Malicious};

// Serialized form is always lowercase "harmful" / "harmless".
std::string_view to_string(Verdict v) noexcept;
// Strict inverse of to_string; throws InputError on anything else.
Verdict verdict_from_string(std::string_view s);

// "ori", "b", "m".
std::string_view variant_suffix(VariantKind v) noexcept;
std::string_view variant_name(VariantKind v) noexcept;
VariantKind variant_from_suffix(std::string_view s);

// `<id>#ori`, `<id>#b`, `<id>#m`.
std::string variant_id(std::string_view base_id, VariantKind v);

struct Meme {
  std::string id;
  std::string image_ref;
  std::string text;

  friend bool operator==(const Meme&, const Meme&) = default;
};

// Throws InputError when the id is empty.
Meme make_meme(std::string id, std::string image_ref, std::string text);

// The original meme and whichever rewrites the run produced. Rewrites share
// the original's image_ref; only the text differs.
struct VariantSet {
  Meme original;
  std::optional<Meme> benevolent;
  std::optional<Meme> malicious;

  const Meme* get(VariantKind v) const noexcept;
};

struct EvidenceHit {
  std::string meme_id;
  float similarity = 0.0f;

  friend bool operator==(const EvidenceHit&, const EvidenceHit&) = default;
};

// Hits sorted by similarity descending, ties broken by meme_id ascending.
struct EvidenceSet {
  std::string query_id;
  std::vector<EvidenceHit> hits;

  std::size_t size() const noexcept { return hits.size(); }
  bool empty() const noexcept { return hits.empty(); }
};

struct ProsecutionResult {
  VariantKind variant = VariantKind::Original;
  Verdict verdict = Verdict::Harmless;
  std::string rationale;
  std::string raw_output;
  // Set when the verdict came from the last-resort default rather than a
  // parsed answer.
  bool parse_fallback = false;
  int attempts = 1;
};

struct JudgeOutput {
  Verdict verdict = Verdict::Harmless;
  std::string rationale;
  std::string raw_output;
  bool parse_fallback = false;
  int attempts = 1;
};

}  // namespace prism
