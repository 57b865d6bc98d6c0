#include "prism/core/labels.hpp"

#include <string>

#include "prism/core/text.hpp"
#include "prism/errors.hpp"

namespace prism {

LabelScheme label_scheme_from_string(std::string_view s) {
  const std::string lowered = text::to_lower(text::trim(s));
  if (lowered == "harm" || lowered == "harm-3") return LabelScheme::HarM;
  if (lowered == "binary") return LabelScheme::Binary;
  throw InputError("unknown label scheme '" + std::string(s) + "' (expected harm or binary)");
}

Verdict normalize_label(std::string_view raw, LabelScheme scheme) {
  const std::string key = text::to_lower(text::trim(raw));
  switch (scheme) {
    case LabelScheme::HarM:
      if (key == "very harmful" || key == "partially harmful") return Verdict::Harmful;
      if (key == "harmless") return Verdict::Harmless;
      break;
    case LabelScheme::Binary:
      if (key == "harmful") return Verdict::Harmful;
      if (key == "harmless") return Verdict::Harmless;
      break;
  }
  throw UnknownLabel(std::string(raw));
}

}  // namespace prism
