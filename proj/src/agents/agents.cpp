#include "prism/agents/agents.hpp"

#include <algorithm>
#include <cctype>

#include "prism/backend/output_parsing.hpp"
#include "prism/core/text.hpp"
#include "prism/errors.hpp"

namespace prism {

namespace {

constexpr std::string_view kUpdatedRulesMarker = "updated rules:";

struct VerdictCall {
  Verdict verdict = Verdict::Harmless;
  std::string thought;
  std::string raw;
  bool fallback = false;
  int attempts = 1;
};

// Parse, retry once verbatim, keyword-scan, then default to Harmless.
VerdictCall ask_for_verdict(Backend& backend, const ChatRequest& req) {
  VerdictCall call;
  call.raw = backend.complete(req);
  try {
    auto parsed = parse_answer(call.raw);
    call.verdict = parsed.verdict;
    call.thought = std::move(parsed.thought);
    return call;
  } catch (const Unparseable&) {
  }

  call.attempts = 2;
  call.raw = backend.complete(req);
  try {
    auto parsed = parse_answer(call.raw);
    call.verdict = parsed.verdict;
    call.thought = std::move(parsed.thought);
    return call;
  } catch (const Unparseable&) {
  }

  call.thought = std::string(text::trim(call.raw));
  if (auto v = keyword_scan(call.raw)) {
    call.verdict = *v;
  } else {
    call.verdict = Verdict::Harmless;
    call.fallback = true;
  }
  return call;
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

Meme analyst_rewrite(const Meme& meme, Intent intent, const PromptSet& prompts, Backend& backend) {
  const bool benevolent = intent == Intent::Benevolent;
  ChatRequest req;
  req.prompt = (benevolent ? prompts.benevolent : prompts.malicious).render({{"text", meme.text}});
  req.images = {meme.image_ref};
  req.temperature = kRewriteTemperature;
  req.max_tokens = kRewriteMaxTokens;
  req.tag = std::string(benevolent ? tags::kAnalystBenevolent : tags::kAnalystMalicious);

  const std::string raw = backend.complete(req);
  const std::string_view fallback = text::trim(meme.text).empty() ? kNoTextMarker : std::string_view(meme.text);

  const std::string_view base_id = std::string_view(meme.id).substr(0, meme.id.find('#'));
  return Meme{variant_id(base_id, benevolent ? VariantKind::Benevolent : VariantKind::Malicious), meme.image_ref,
              sanitize_rewrite(raw, fallback)};
}

const std::string& InterpretationState::rules() const noexcept {
  static const std::string kEmpty;
  return steps.empty() ? kEmpty : steps.back().rules;
}

ExtractedRules cap_rules(std::string_view rules, std::size_t max_items) {
  // Item starts are numbers that follow on from the previous item (1, 2, 3,
  // ...), sit at a line/word boundary and end in "." or ")".
  std::vector<std::size_t> starts;
  std::size_t expected = 1;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (!is_digit(rules[i]) || (i > 0 && !is_space(rules[i - 1]))) continue;
    std::size_t j = i;
    std::size_t number = 0;
    while (j < rules.size() && is_digit(rules[j]) && j - i < 4) number = number * 10 + static_cast<std::size_t>(rules[j++] - '0');
    if (j >= rules.size() || (rules[j] != '.' && rules[j] != ')')) continue;
    if (j + 1 < rules.size() && !is_space(rules[j + 1])) continue;
    if (number != expected) continue;
    starts.push_back(i);
    ++expected;
    i = j;
  }
  if (starts.size() <= max_items) return {std::string(rules), false};
  return {std::string(text::trim(rules.substr(0, starts[max_items]))), true};
}

std::optional<ExtractedRules> extract_updated_rules(std::string_view raw) {
  const std::size_t pos = text::rfind_icase(raw, kUpdatedRulesMarker);
  if (pos == std::string_view::npos) return std::nullopt;
  return cap_rules(text::trim(raw.substr(pos + kUpdatedRulesMarker.size())), kMaxRules);
}

InterpretationState investigate(VariantKind variant, const EvidenceSet& evidence, const MemeCatalog& corpus,
                                const PromptSet& prompts, Backend& backend) {
  InterpretationState state;
  state.variant = variant;
  for (const auto& hit : evidence.hits) {
    const Meme& related = corpus.at(hit.meme_id);
    ChatRequest req;
    req.prompt = prompts.interpret.render({{"org_sent", related.text}, {"rules", state.rules()}});
    req.images = {related.image_ref};
    req.temperature = kDeterministicTemperature;
    req.max_tokens = kReasoningMaxTokens;
    req.tag = std::string(tags::kInvestigator);

    InterpretationStep step;
    step.evidence_id = hit.meme_id;
    step.similarity = hit.similarity;
    step.raw_output = backend.complete(req);
    if (auto extracted = extract_updated_rules(step.raw_output)) {
      step.rules = std::move(extracted->text);
      step.truncated = extracted->truncated;
    } else {
      step.rules = state.rules();
      step.marker_missing = true;
    }
    state.steps.push_back(std::move(step));
  }
  return state;
}

ProsecutionResult prosecute(const Meme& original, std::string_view interpretation, VariantKind variant,
                            const PromptSet& prompts, Backend& backend) {
  ChatRequest req;
  req.prompt = prompts.prosecute.render({{"text", original.text},
                                         {"image", std::string(kImagePlaceholder)},
                                         {"note", std::string(interpretation)}});
  req.images = {original.image_ref};
  req.temperature = kDeterministicTemperature;
  req.max_tokens = kReasoningMaxTokens;
  req.tag = std::string(tags::kProsecutor);

  VerdictCall call = ask_for_verdict(backend, req);
  return ProsecutionResult{variant, call.verdict, std::move(call.thought), std::move(call.raw), call.fallback,
                           call.attempts};
}

ProsecutionResult direct_classify(const Meme& original, const PromptSet& prompts, Backend& backend) {
  ChatRequest req;
  req.prompt = prompts.direct.render({{"text", original.text}, {"image", std::string(kImagePlaceholder)}});
  req.images = {original.image_ref};
  req.temperature = kDeterministicTemperature;
  req.max_tokens = kReasoningMaxTokens;
  req.tag = std::string(tags::kDirect);

  VerdictCall call = ask_for_verdict(backend, req);
  return ProsecutionResult{VariantKind::Original, call.verdict, std::move(call.thought), std::move(call.raw),
                           call.fallback, call.attempts};
}

std::string core_representation(const Meme& original, const EvidenceSet& core_evidence, const MemeCatalog& corpus,
                                 const PromptSet& prompts, Backend& backend) {
  ChatRequest req;
  req.images = {original.image_ref};
  std::string blocks;
  for (std::size_t i = 0; i < core_evidence.hits.size(); ++i) {
    const Meme& similar = corpus.at(core_evidence.hits[i].meme_id);
    if (i > 0) blocks += '\n';
    blocks += "Meme " + std::to_string(i + 1) + ":\n- Text: \"" + similar.text + "\"\n- (Image is provided)";
    req.images.push_back(similar.image_ref);
  }
  req.prompt = prompts.core.render({{"num_similar", std::to_string(core_evidence.hits.size())},
                                    {"target_text", original.text},
                                    {"similar_memes", blocks}});
  req.temperature = kDeterministicTemperature;
  req.max_tokens = kReasoningMaxTokens;
  req.tag = std::string(tags::kCore);
  return backend.complete(req);
}

std::string render_judge_prompt(const Meme& original, const ProsecutionResult& reference,
                                std::span<const ProsecutionResult> dissents, std::string_view core,
                                const PromptSet& prompts) {
  std::vector<const ProsecutionResult*> ordered;
  for (const auto& d : dissents) ordered.push_back(&d);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ProsecutionResult* a, const ProsecutionResult* b) { return a->variant < b->variant; });

  std::string dissent_text;
  char label = 'B';
  for (const auto* d : ordered) {
    if (!dissent_text.empty()) dissent_text += '\n';
    dissent_text += std::string("Investigator ") + label++ + ":\nVerdict: " + std::string(to_string(d->verdict)) +
                    "\nReasoning: " + d->rationale;
  }
  return prompts.judge.render({{"orig_text", original.text},
                               {"investigator_a_verdict", std::string(to_string(reference.verdict))},
                               {"investigator_a_reasoning", reference.rationale},
                               {"dissenting_investigators", dissent_text},
                               {"core_representation", std::string(core)}});
}

JudgeOutput judge(const Meme& original, const ProsecutionResult& reference,
                  std::span<const ProsecutionResult> dissents, std::string_view core, const PromptSet& prompts,
                  Backend& backend) {
  if (dissents.empty()) throw PreconditionError("judge requires at least one dissenting prosecution");
  ChatRequest req;
  req.prompt = render_judge_prompt(original, reference, dissents, core, prompts);
  req.images = {original.image_ref};
  req.temperature = kDeterministicTemperature;
  req.max_tokens = kReasoningMaxTokens;
  req.tag = std::string(tags::kJudge);

  VerdictCall call = ask_for_verdict(backend, req);
  return JudgeOutput{call.verdict, std::move(call.thought), std::move(call.raw), call.fallback, call.attempts};
}

}  // namespace prism
