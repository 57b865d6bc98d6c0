#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace prism {

using SlotValues = std::map<std::string, std::string, std::less<>>;

// Prompt text with `{slot}` placeholders. Slot names are identifiers
// ([A-Za-z_][A-Za-z0-9_]*); `{{` and `}}` produce literal braces, and any
// other brace sequence is kept verbatim.
class PromptTemplate {
 public:
  PromptTemplate() = default;
  explicit PromptTemplate(std::string text);

  // Every declared slot must have a value (TemplateError otherwise). Extra
  // values are ignored so overriding templates may drop slots they don't use.
  std::string render(const SlotValues& values) const;

  const std::string& text() const noexcept { return text_; }
  // Declared slots in first-occurrence order, without duplicates.
  const std::vector<std::string>& slots() const noexcept { return slots_; }
  bool has_slot(std::string_view name) const;

 private:
  struct Piece {
    bool is_slot = false;
    std::string value;  // literal text or slot name
  };

  std::string text_;
  std::vector<Piece> pieces_;
  std::vector<std::string> slots_;
};

}  // namespace prism
