#pragma once

#include <filesystem>
#include <optional>
#include <string_view>

#include "prism/agents/template.hpp"

namespace prism {

// Byte-exact copies of the files under prompts/, compiled in.
namespace default_prompts {
std::string_view analyst_benevolent();
std::string_view analyst_malicious();
std::string_view investigator();
std::string_view prosecutor();
std::string_view core();
std::string_view judge();
std::string_view direct();
std::string_view rubric();
}  // namespace default_prompts

// Optional per-template overrides; unset entries use the shipped defaults.
struct PromptPaths {
  std::optional<std::filesystem::path> benevolent;
  std::optional<std::filesystem::path> malicious;
  std::optional<std::filesystem::path> interpret;
  std::optional<std::filesystem::path> prosecute;
  std::optional<std::filesystem::path> core;
  std::optional<std::filesystem::path> judge;
  std::optional<std::filesystem::path> direct;
};

struct PromptSet {
  PromptTemplate benevolent;  // {text}
  PromptTemplate malicious;   // {text}
  PromptTemplate interpret;   // {org_sent} {rules}
  PromptTemplate prosecute;   // {text} {image} {note}
  PromptTemplate core;        // {num_similar} {target_text} {similar_memes}
  PromptTemplate judge;       // {orig_text} {investigator_a_verdict} {investigator_a_reasoning}
                              // {dissenting_investigators} {core_representation}
  PromptTemplate direct;      // {text} {image}; single-shot classification

  static PromptSet defaults();
  // Throws InputError when an override file cannot be read.
  static PromptSet load(const PromptPaths& paths);
};

std::string read_text_file(const std::filesystem::path& path);

// Rendered in place of an inline image reference in prompt text; the image
// itself travels in ChatRequest::images.
inline constexpr std::string_view kImagePlaceholder = "<image>";

}  // namespace prism
