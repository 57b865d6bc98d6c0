#include "prism/agents/prompts.hpp"

#include <fstream>
#include <sstream>

#include "prism/errors.hpp"

namespace prism {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PromptSet PromptSet::defaults() {
  return load(PromptPaths{});
}

PromptSet PromptSet::load(const PromptPaths& paths) {
  auto pick = [](const std::optional<std::filesystem::path>& override, std::string_view fallback) {
    return PromptTemplate(override ? read_text_file(*override) : std::string(fallback));
  };
  PromptSet set;
  set.benevolent = pick(paths.benevolent, default_prompts::analyst_benevolent());
  set.malicious = pick(paths.malicious, default_prompts::analyst_malicious());
  set.interpret = pick(paths.interpret, default_prompts::investigator());
  set.prosecute = pick(paths.prosecute, default_prompts::prosecutor());
  set.core = pick(paths.core, default_prompts::core());
  set.judge = pick(paths.judge, default_prompts::judge());
  set.direct = pick(paths.direct, default_prompts::direct());
  return set;
}

}  // namespace prism
