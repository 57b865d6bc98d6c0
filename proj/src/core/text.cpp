#include "prism/core/text.hpp"

#include <algorithm>
#include <cctype>

namespace prism::text {

namespace {

char lower(char c) noexcept {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool equal_icase_at(std::string_view hay, std::size_t pos, std::string_view needle) noexcept {
  for (std::size_t i = 0; i < needle.size(); ++i) {
    if (lower(hay[pos + i]) != lower(needle[i])) return false;
  }
  return true;
}

}  // namespace

std::string_view trim(std::string_view s) noexcept {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

std::size_t rfind_icase(std::string_view haystack, std::string_view needle) noexcept {
  if (needle.size() > haystack.size()) return std::string_view::npos;
  for (std::size_t pos = haystack.size() - needle.size() + 1; pos-- > 0;) {
    if (equal_icase_at(haystack, pos, needle)) return pos;
  }
  return std::string_view::npos;
}

std::size_t find_icase(std::string_view haystack, std::string_view needle,
                       std::size_t from) noexcept {
  if (needle.size() > haystack.size()) return std::string_view::npos;
  for (std::size_t pos = from; pos + needle.size() <= haystack.size(); ++pos) {
    if (equal_icase_at(haystack, pos, needle)) return pos;
  }
  return std::string_view::npos;
}

bool starts_with_icase(std::string_view s, std::string_view prefix) noexcept {
  return s.size() >= prefix.size() && equal_icase_at(s, 0, prefix);
}

}  // namespace prism::text
