#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "prism/core/types.hpp"

namespace prism::testing {

struct ParseCase {
  std::string_view raw;
  std::optional<Verdict> verdict;  // nullopt: must throw Unparseable
  std::optional<std::string_view> thought;
};

inline constexpr auto H = Verdict::Harmful;
inline constexpr auto N = Verdict::Harmless;

inline const std::array<ParseCase, 30>& parse_corpus() {
  static const std::array<ParseCase, 30> cases = {{
      {"Thought: mocks a group. Answer: harmful", H, "mocks a group."},
      {"Answer: HARMLESS.", N, ""},
      {"this meme is fine", std::nullopt, std::nullopt},
      {"Thought: nothing bad here. Answer: harmless", N, "nothing bad here."},
      {"thought: lower case markers answer: harmful", H, "lower case markers"},
      {"THOUGHT: shouting. ANSWER: HARMFUL", H, "shouting."},
      {"Thought: x\nAnswer: Harmless", N, "x"},
      {"Thought: it is not harmful at all. Answer: harmless", N, "it is not harmful at all."},
      {"Thought: could seem harmless at first glance. Answer: harmful", H, "could seem harmless at first glance."},
      {"Thought: a. Answer: harmful. Thought: b. Answer: harmless", N, std::nullopt},
      {"Answer: [harmful]", H, ""},
      {"Answer: **Harmless**", N, ""},
      {"Answer: \"harmful\"", H, ""},
      {"Answer:harmless", N, ""},
      {"Answer:   \n  harmful", H, ""},
      {"Thought: t Answer: The meme is harmful.", H, "t"},
      {"Thought: t Answer: I think it is harmless overall", N, "t"},
      {"The meme is harmful.", H, "The meme is harmful."},
      {"The meme is harmless.", N, "The meme is harmless."},
      {"First I thought harmful, but it is harmless", N, std::nullopt},
      {"It looked harmless, but really it is harmful", H, std::nullopt},
      {"Thought: unclear", std::nullopt, std::nullopt},
      {"", std::nullopt, std::nullopt},
      {"Answer: unsure", std::nullopt, std::nullopt},
      {"Answer: harmlessness", std::nullopt, std::nullopt},
      {"harmfulness is debated", std::nullopt, std::nullopt},
      {"Reasoning first. Answer: harmful", H, "Reasoning first."},
      {"Thought: \"quoted\" words. Answer: (harmless)", N, "\"quoted\" words."},
      {"Thought: mixed CaSe. Answer: hArMfUl", H, "mixed CaSe."},
      {"Answer: harmless\n\nNote: not harmful", N, ""},
  }};
  return cases;
}

}  // namespace prism::testing
