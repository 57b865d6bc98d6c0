#include "prism/evaluation/rubric.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <json.hpp>

#include "prism/core/text.hpp"
#include "prism/errors.hpp"

namespace prism {

namespace {

// Number right after `pos`, allowing ":", "=", "-" and spaces in between.
std::optional<double> number_after(std::string_view raw, std::size_t pos) {
  auto separator = [&](std::size_t i) {
    const char c = raw[i];
    if (c == '-') return i + 1 >= raw.size() || !std::isdigit(static_cast<unsigned char>(raw[i + 1]));
    return c == ':' || c == '=' || c == '*' || std::isspace(static_cast<unsigned char>(c));
  };
  while (pos < raw.size() && separator(pos)) ++pos;
  std::size_t end = pos;
  if (end < raw.size() && (raw[end] == '-' || raw[end] == '+')) ++end;
  const std::size_t digits_start = end;
  while (end < raw.size() && (std::isdigit(static_cast<unsigned char>(raw[end])) || raw[end] == '.')) ++end;
  if (end == digits_start) return std::nullopt;
  const std::string number(raw.substr(pos, end - pos));
  char* parsed_end = nullptr;
  const double v = std::strtod(number.c_str(), &parsed_end);
  if (parsed_end == number.c_str()) return std::nullopt;
  return v;
}

void append_section(std::string& out, std::string_view title, std::string_view body) {
  out += title;
  out += ":\n";
  out += text::trim(body).empty() ? std::string_view("(empty)") : text::trim(body);
  out += "\n\n";
}

}  // namespace

RubricScore parse_rubric(std::string_view raw) {
  RubricScore score;
  score.raw_output = std::string(raw);
  std::vector<std::string_view> missing;
  for (std::size_t d = 0; d < kRubricDimensions.size(); ++d) {
    std::optional<double> value;
    for (std::size_t pos = text::find_icase(raw, kRubricDimensions[d]); pos != std::string_view::npos && !value;
         pos = text::find_icase(raw, kRubricDimensions[d], pos + 1)) {
      value = number_after(raw, pos + kRubricDimensions[d].size());
    }
    if (!value) {
      missing.push_back(kRubricDimensions[d]);
      continue;
    }
    if (*value < 0.0 || *value > 10.0) score.clamped.emplace_back(kRubricDimensions[d]);
    score.values[d] = static_cast<float>(std::clamp(*value, 0.0, 10.0));
  }
  if (!missing.empty()) throw Unparseable(fmt::format("rubric reply lacks {}", fmt::join(missing, ", ")));
  return score;
}

std::string render_reasoning_chain(const CaseTrace& t) {
  std::string out;
  if (const auto* ori = t.variant(VariantKind::Original)) append_section(out, "Meme text", ori->text);
  for (const auto& v : t.variants) {
    if (v.variant == VariantKind::Original) continue;
    append_section(out, fmt::format("Rewrite ({})", variant_name(v.variant)), v.text);
  }
  if (t.interpretations) {
    for (const auto& s : *t.interpretations) {
      append_section(out, fmt::format("Rules learned from similar memes ({})", variant_name(s.variant)), s.rules());
    }
  }
  if (t.prosecutions) {
    for (const auto& p : *t.prosecutions) {
      append_section(out, fmt::format("Prosecution ({}) verdict {}", variant_name(p.variant), to_string(p.verdict)),
                     p.rationale);
    }
  }
  if (t.direct) append_section(out, fmt::format("Direct verdict {}", to_string(t.direct->verdict)), t.direct->rationale);
  if (t.core_representation) append_section(out, "Core representation", *t.core_representation);
  if (t.judge_output) {
    append_section(out, fmt::format("Judge verdict {}", to_string(t.judge_output->verdict)),
                   t.judge_output->rationale);
  }
  if (t.final_verdict) out += fmt::format("Final verdict: {}\n", to_string(*t.final_verdict));
  return out;
}

RubricScore rubric_score(const CaseTrace& trace, Backend& backend, const PromptTemplate& rubric_prompt) {
  if (trace.status != CaseStatus::Ok) throw PreconditionError("cannot score failed trace '" + trace.meme_id + "'");
  ChatRequest req;
  req.prompt = rubric_prompt.render({{"reasoning_chain", render_reasoning_chain(trace)}});
  if (!trace.image_ref.empty()) req.images = {trace.image_ref};
  req.temperature = kDeterministicTemperature;
  req.max_tokens = kReasoningMaxTokens;
  req.tag = std::string(tags::kRubric);

  try {
    return parse_rubric(backend.complete(req));
  } catch (const Unparseable&) {
  }
  RubricScore score = parse_rubric(backend.complete(req));
  score.attempts = 2;
  return score;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t sample, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (sample >= n) return idx;
  std::mt19937_64 rng(seed);
  // partial Fisher-Yates
  for (std::size_t i = 0; i < sample; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(sample);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string rubric_to_json_line(std::string_view id, const RubricScore& score) {
  nlohmann::ordered_json j;
  j["id"] = id;
  nlohmann::ordered_json scores;
  const char* keys[] = {"faithfulness", "inference_coherence", "inference_depth", "judgment_rationality",
                        "expression_clarity"};
  for (std::size_t d = 0; d < score.values.size(); ++d) scores[keys[d]] = score.values[d];
  j["scores"] = scores;
  auto flags = nlohmann::ordered_json::array();
  for (const auto& c : score.clamped) flags.push_back("clamped:" + c);
  if (score.attempts > 1) flags.push_back("retried");
  j["flags"] = flags;
  return j.dump();
}

}  // namespace prism
