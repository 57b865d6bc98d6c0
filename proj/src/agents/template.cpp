#include "prism/agents/template.hpp"

#include <algorithm>
#include <cctype>

#include "prism/errors.hpp"

namespace prism {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {
  std::string literal;
  auto flush = [&] {
    if (!literal.empty()) pieces_.push_back({false, std::move(literal)});
    literal.clear();
  };

  const std::string& s = text_;
  for (std::size_t i = 0; i < s.size();) {
    if (s.compare(i, 2, "{{") == 0 || s.compare(i, 2, "}}") == 0) {
      literal += s[i];
      i += 2;
      continue;
    }
    if (s[i] == '{' && i + 1 < s.size() && ident_start(s[i + 1])) {
      std::size_t j = i + 1;
      while (j < s.size() && ident_char(s[j])) ++j;
      if (j < s.size() && s[j] == '}') {
        flush();
        std::string name = s.substr(i + 1, j - i - 1);
        if (std::find(slots_.begin(), slots_.end(), name) == slots_.end()) slots_.push_back(name);
        pieces_.push_back({true, std::move(name)});
        i = j + 1;
        continue;
      }
    }
    literal += s[i++];
  }
  flush();
}

std::string PromptTemplate::render(const SlotValues& values) const {
  for (const auto& slot : slots_) {
    if (!values.contains(slot)) throw TemplateError("missing value for prompt slot {" + slot + "}");
  }
  std::string out;
  out.reserve(text_.size());
  for (const auto& piece : pieces_) {
    out += piece.is_slot ? values.find(piece.value)->second : piece.value;
  }
  return out;
}

bool PromptTemplate::has_slot(std::string_view name) const {
  return std::find(slots_.begin(), slots_.end(), name) != slots_.end();
}

}  // namespace prism
