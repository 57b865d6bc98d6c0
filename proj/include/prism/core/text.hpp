#pragma once

#include <string>
#include <string_view>

// ASCII-only helpers; model output is matched against ASCII markers.
namespace prism::text {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);

// Position of the last case-insensitive occurrence of `needle`, or npos.
std::size_t rfind_icase(std::string_view haystack, std::string_view needle) noexcept;
std::size_t find_icase(std::string_view haystack, std::string_view needle,
                       std::size_t from = 0) noexcept;

bool starts_with_icase(std::string_view s, std::string_view prefix) noexcept;

}  // namespace prism::text
