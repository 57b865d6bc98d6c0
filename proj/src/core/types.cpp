#include "prism/core/types.hpp"

#include "prism/errors.hpp"

namespace prism {

std::string_view to_string(Verdict v) noexcept {
  return v == Verdict::Harmful ? "harmful" : "harmless";
}

Verdict verdict_from_string(std::string_view s) {
  if (s == "harmful") return Verdict::Harmful;
  if (s == "harmless") return Verdict::Harmless;
  throw InputError("invalid verdict '" + std::string(s) + "'");
}

std::string_view variant_suffix(VariantKind v) noexcept {
  switch (v) {
    case VariantKind::Original:
      return "ori";
    case VariantKind::Benevolent:
      return "b";
    case VariantKind::Malicious:
      return "m";
  }
  return "ori";
}

std::string_view variant_name(VariantKind v) noexcept {
  switch (v) {
    case VariantKind::Original:
      return "original";
    case VariantKind::Benevolent:
      return "benevolent";
    case VariantKind::Malicious:
      return "malicious";
  }
  return "original";
}

VariantKind variant_from_suffix(std::string_view s) {
  if (s == "ori") return VariantKind::Original;
  if (s == "b") return VariantKind::Benevolent;
  if (s == "m") return VariantKind::Malicious;
  throw InputError("invalid variant '" + std::string(s) + "' (expected ori, b or m)");
}

std::string variant_id(std::string_view base_id, VariantKind v) {
  std::string out(base_id);
  out += '#';
  out += variant_suffix(v);
  return out;
}

Meme make_meme(std::string id, std::string image_ref, std::string text) {
  if (id.empty()) throw InputError("meme id must be non-empty");
  return Meme{std::move(id), std::move(image_ref), std::move(text)};
}

const Meme* VariantSet::get(VariantKind v) const noexcept {
  switch (v) {
    case VariantKind::Original:
      return &original;
    case VariantKind::Benevolent:
      return benevolent ? &*benevolent : nullptr;
    case VariantKind::Malicious:
      return malicious ? &*malicious : nullptr;
  }
  return nullptr;
}

}  // namespace prism
