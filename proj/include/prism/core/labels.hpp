#pragma once

#include <string_view>

#include "prism/core/types.hpp"

namespace prism {

// HarM ships three classes (very harmful / partially harmful / harmless);
// everything else is already binary.
enum class LabelScheme { HarM, Binary };

LabelScheme label_scheme_from_string(std::string_view s);

// Case-insensitive after trimming. The two harmful HarM grades collapse into
// Harmful. Throws UnknownLabel for anything outside the scheme's vocabulary.
Verdict normalize_label(std::string_view raw, LabelScheme scheme);

}  // namespace prism
