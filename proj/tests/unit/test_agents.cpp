#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "oracles.hpp"
#include "prism/agents/agents.hpp"
#include "prism/agents/prompts.hpp"
#include "prism/agents/template.hpp"
#include "prism/backend/scripted.hpp"
#include "prism/errors.hpp"

namespace prism {
namespace {

using Script = std::vector<ScriptEntry>;

TEST(PromptTemplate, RendersSlotsAndEscapes) {
  PromptTemplate t("Hi {name}, {{literal}} {name} {not a slot} {9x}");
  EXPECT_EQ(t.slots(), std::vector<std::string>{"name"});
  EXPECT_TRUE(t.has_slot("name"));
  EXPECT_FALSE(t.has_slot("literal"));
  EXPECT_EQ(t.render({{"name", "Bo"}, {"extra", "ignored"}}), "Hi Bo, {literal} Bo {not a slot} {9x}");
}

TEST(PromptTemplate, ValuesAreNotReexpanded) {
  PromptTemplate t("[{a}]");
  EXPECT_EQ(t.render({{"a", "{a} {{b}}"}}), "[{a} {{b}}]");
}

TEST(PromptTemplate, MissingSlotThrows) {
  PromptTemplate t("{a} {b}");
  EXPECT_THROW(t.render({{"a", "1"}}), TemplateError);
}

TEST(PromptTemplate, SlotOrderIsFirstOccurrence) {
  PromptTemplate t("{b}{a}{b}{c}");
  EXPECT_EQ(t.slots(), (std::vector<std::string>{"b", "a", "c"}));
}

struct ShippedPrompt {
  const char* file;
  std::string_view (*text)();
  std::vector<std::string> slots;
};

TEST(DefaultPrompts, ByteMatchShippedFilesAndDeclareExpectedSlots) {
  const std::vector<ShippedPrompt> shipped = {
      {"analyst_benevolent.txt", default_prompts::analyst_benevolent, {"text"}},
      {"analyst_malicious.txt", default_prompts::analyst_malicious, {"text"}},
      {"investigator.txt", default_prompts::investigator, {"org_sent", "rules"}},
      {"prosecutor.txt", default_prompts::prosecutor, {"text", "image", "note"}},
      {"core.txt", default_prompts::core, {"num_similar", "target_text", "similar_memes"}},
      {"judge.txt", default_prompts::judge,
       {"orig_text", "investigator_a_verdict", "investigator_a_reasoning", "dissenting_investigators",
        "core_representation"}},
      {"direct.txt", default_prompts::direct, {"text", "image"}},
  };
  for (const auto& p : shipped) {
    SCOPED_TRACE(p.file);
    EXPECT_EQ(read_text_file(testing::prompt_dir() / p.file), p.text());
    PromptTemplate t{std::string(p.text())};
    auto got = t.slots();
    auto want = p.slots;
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    EXPECT_EQ(got, want);
  }
  EXPECT_EQ(read_text_file(testing::prompt_dir() / "rubric.txt"), default_prompts::rubric());
}

TEST(PromptSet, OverrideFileReplacesOneTemplate) {
  const auto dir = std::filesystem::temp_directory_path() / "prism_test_agents";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "judge.txt") << "custom {orig_text}";
  PromptPaths paths;
  paths.judge = dir / "judge.txt";
  const auto set = PromptSet::load(paths);
  EXPECT_EQ(set.judge.text(), "custom {orig_text}");
  EXPECT_EQ(set.prosecute.text(), default_prompts::prosecutor());
  paths.core = dir / "missing.txt";
  EXPECT_THROW(PromptSet::load(paths), InputError);
}

// Templates that make requests easy to inspect.
PromptSet plain_prompts() {
  PromptSet p;
  p.benevolent = PromptTemplate("B:{text}");
  p.malicious = PromptTemplate("M:{text}");
  p.interpret = PromptTemplate("I:{org_sent}|{rules}");
  p.prosecute = PromptTemplate("P:{text}|{image}|{note}");
  p.core = PromptTemplate("C:{num_similar}|{target_text}|{similar_memes}");
  p.judge = PromptTemplate(
      "J:{orig_text}|{investigator_a_verdict}|{investigator_a_reasoning}|{dissenting_investigators}|{core_representation}");
  p.direct = PromptTemplate("D:{text}|{image}");
  return p;
}

const Meme kMeme{"q1", "img/q1.png", "some text"};

TEST(Analyst, SanitizesAndKeepsImage) {
  ScriptedBackend b(Script{{"analyst_benevolent", "rewrite: you rock!"}, {"analyst_malicious", "\"you stink\""}});
  const auto ben = analyst_rewrite(kMeme, Intent::Benevolent, plain_prompts(), b);
  EXPECT_EQ(ben.text, "you rock!");
  EXPECT_EQ(ben.id, "q1#b");
  EXPECT_EQ(ben.image_ref, kMeme.image_ref);
  const auto mal = analyst_rewrite(kMeme, Intent::Malicious, plain_prompts(), b);
  EXPECT_EQ(mal.text, "you stink");
  EXPECT_EQ(mal.id, "q1#m");

  const auto log = b.call_log();
  ASSERT_EQ(log.size(), 2u);
  EXPECT_EQ(log[0].request.prompt, "B:some text");
  EXPECT_EQ(log[0].request.images, std::vector<std::string>{"img/q1.png"});
  EXPECT_FLOAT_EQ(log[0].request.temperature, 0.3f);
  EXPECT_EQ(log[0].request.max_tokens, 256);
  EXPECT_EQ(log[1].request.prompt, "M:some text");
}

TEST(Analyst, EmptyOutputFallsBack) {
  ScriptedBackend b(Script{{"analyst_benevolent", ""}, {"analyst_benevolent", "  "}});
  EXPECT_EQ(analyst_rewrite(kMeme, Intent::Benevolent, plain_prompts(), b).text, "some text");
  const Meme blank{"q4", "img/q4.png", ""};
  EXPECT_EQ(analyst_rewrite(blank, Intent::Benevolent, plain_prompts(), b).text, kNoTextMarker);
}

TEST(CapRules, CutsAfterMaxItems) {
  const std::string six = "1. a\n2. b\n3. c\n4. d\n5. e\n6. f";
  const auto capped = cap_rules(six, 5);
  EXPECT_TRUE(capped.truncated);
  EXPECT_EQ(capped.text, "1. a\n2. b\n3. c\n4. d\n5. e");
  const auto kept = cap_rules("1) a 2) b", 5);
  EXPECT_FALSE(kept.truncated);
  EXPECT_EQ(kept.text, "1) a 2) b");
  // embedded numbers are not item starts
  EXPECT_FALSE(cap_rules("1. costs 3.5 dollars, see 10. x", 1).truncated);
}

TEST(ExtractUpdatedRules, UsesLastMarker) {
  EXPECT_EQ(extract_updated_rules("no marker here"), std::nullopt);
  const auto r = extract_updated_rules("Updated rules: old\nThought: again\nUPDATED RULES:\n 1. new rule \n");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->text, "1. new rule");
  EXPECT_FALSE(r->truncated);
}

EvidenceSet evidence(std::vector<std::string> ids) {
  EvidenceSet e;
  e.query_id = "q1";
  float s = 0.9f;
  for (auto& id : ids) {
    e.hits.push_back({std::move(id), s});
    s -= 0.1f;
  }
  return e;
}

MemeCatalog small_corpus() {
  return MemeCatalog(std::vector<Meme>{{"c1", "c1.png", "one"}, {"c2", "c2.png", "two"}, {"c3", "c3.png", "three"}});
}

TEST(Investigator, ChainsRulesAcrossEvidence) {
  ScriptedBackend b(Script{{"investigator", "Thought: a\nUpdated rules:\n1. r1"},
                     {"investigator", "Thought: nothing useful"},
                     {"investigator", "Updated rules:\n1. r1\n2. r2"}});
  const auto corpus = small_corpus();
  const auto state = investigate(VariantKind::Benevolent, evidence({"c2", "c1", "c3"}), corpus, plain_prompts(), b);
  ASSERT_EQ(state.step(), 3u);
  EXPECT_EQ(state.variant, VariantKind::Benevolent);
  EXPECT_EQ(state.steps[0].evidence_id, "c2");
  EXPECT_EQ(state.steps[0].rules, "1. r1");
  EXPECT_TRUE(state.steps[1].marker_missing);
  EXPECT_EQ(state.steps[1].rules, "1. r1");
  EXPECT_EQ(state.rules(), "1. r1\n2. r2");

  const auto log = b.call_log();
  EXPECT_EQ(log[0].request.prompt, "I:two|");
  EXPECT_EQ(log[0].request.images, std::vector<std::string>{"c2.png"});
  EXPECT_EQ(log[1].request.prompt, "I:one|1. r1");
  EXPECT_EQ(log[2].request.prompt, "I:three|1. r1");
  EXPECT_FLOAT_EQ(log[2].request.temperature, 0.0f);
  EXPECT_EQ(log[2].request.max_tokens, 1024);
}

TEST(Investigator, EmptyEvidenceMakesNoCalls) {
  ScriptedBackend b(Script{});
  const auto state = investigate(VariantKind::Original, evidence({}), small_corpus(), plain_prompts(), b);
  EXPECT_EQ(state.step(), 0u);
  EXPECT_EQ(state.rules(), "");
  EXPECT_EQ(b.calls(), 0u);
}

TEST(Prosecutor, JudgesOriginalWithNote) {
  ScriptedBackend b(Script{{"prosecutor", "Thought: mean. Answer: harmful"}});
  const auto r = prosecute(kMeme, "rules here", VariantKind::Malicious, plain_prompts(), b);
  EXPECT_EQ(r.verdict, Verdict::Harmful);
  EXPECT_EQ(r.rationale, "mean.");
  EXPECT_EQ(r.variant, VariantKind::Malicious);
  EXPECT_FALSE(r.parse_fallback);
  EXPECT_EQ(r.attempts, 1);
  EXPECT_EQ(b.call_log()[0].request.prompt, "P:some text|<image>|rules here");
  EXPECT_EQ(b.call_log()[0].request.images, std::vector<std::string>{"img/q1.png"});
}

TEST(Prosecutor, RetriesOnceThenParses) {
  ScriptedBackend b(Script{{"prosecutor", "no idea"}, {"prosecutor", "Answer: harmless"}});
  const auto r = prosecute(kMeme, "", VariantKind::Original, plain_prompts(), b);
  EXPECT_EQ(r.verdict, Verdict::Harmless);
  EXPECT_EQ(r.attempts, 2);
  EXPECT_FALSE(r.parse_fallback);
  EXPECT_EQ(b.call_log()[0].request.prompt, b.call_log()[1].request.prompt);
}

TEST(Prosecutor, KeywordScanThenDefault) {
  ScriptedBackend b(Script{{"prosecutor", "?"}, {"prosecutor", "pretty harmfulness"},
                     {"prosecutor", "?"}, {"prosecutor", "still unsure"}});
  const auto scanned = prosecute(kMeme, "", VariantKind::Original, plain_prompts(), b);
  EXPECT_EQ(scanned.verdict, Verdict::Harmful);
  EXPECT_FALSE(scanned.parse_fallback);
  const auto defaulted = prosecute(kMeme, "", VariantKind::Original, plain_prompts(), b);
  EXPECT_EQ(defaulted.verdict, Verdict::Harmless);
  EXPECT_TRUE(defaulted.parse_fallback);
  EXPECT_EQ(defaulted.attempts, 2);
}

TEST(Direct, SingleCall) {
  ScriptedBackend b(Script{{"direct", "Answer: harmful"}});
  const auto r = direct_classify(kMeme, plain_prompts(), b);
  EXPECT_EQ(r.verdict, Verdict::Harmful);
  EXPECT_EQ(b.call_log()[0].request.prompt, "D:some text|<image>");
}

TEST(Core, OneCallWithAllImages) {
  ScriptedBackend b(Script{{"core", "shared theme"}});
  const auto out = core_representation(kMeme, evidence({"c3", "c1"}), small_corpus(), plain_prompts(), b);
  EXPECT_EQ(out, "shared theme");
  const auto log = b.call_log();
  const auto& req = log[0].request;
  EXPECT_EQ(req.images, (std::vector<std::string>{"img/q1.png", "c3.png", "c1.png"}));
  EXPECT_EQ(req.prompt,
            "C:2|some text|Meme 1:\n- Text: \"three\"\n- (Image is provided)\nMeme 2:\n- Text: \"one\"\n- (Image is provided)");
}

TEST(Judge, RendersDissentsInVariantOrder) {
  const ProsecutionResult ref{VariantKind::Original, Verdict::Harmless, "fine", "", false, 1};
  const std::vector<ProsecutionResult> dissents = {
      {VariantKind::Malicious, Verdict::Harmful, "m says", "", false, 1},
      {VariantKind::Benevolent, Verdict::Harmful, "b says", "", false, 1},
  };
  const auto prompt = render_judge_prompt(kMeme, ref, dissents, "core!", plain_prompts());
  EXPECT_EQ(prompt,
            "J:some text|harmless|fine|Investigator B:\nVerdict: harmful\nReasoning: b says\n"
            "Investigator C:\nVerdict: harmful\nReasoning: m says|core!");

  ScriptedBackend b(Script{{"judge", "Thought: b wins. Answer: harmful"}});
  const auto out = judge(kMeme, ref, dissents, "core!", plain_prompts(), b);
  EXPECT_EQ(out.verdict, Verdict::Harmful);
  EXPECT_EQ(out.rationale, "b wins.");
  EXPECT_EQ(b.call_log()[0].request.prompt, prompt);
}

TEST(Judge, RequiresDissent) {
  ScriptedBackend b(Script{{"judge", "Answer: harmful"}});
  const ProsecutionResult ref;
  EXPECT_THROW(judge(kMeme, ref, {}, "", plain_prompts(), b), PreconditionError);
  EXPECT_EQ(b.calls(), 0u);
}

TEST(DefaultPrompts, RenderWithPipelineSlots) {
  const auto p = PromptSet::defaults();
  EXPECT_NO_THROW(p.benevolent.render({{"text", "t"}}));
  EXPECT_NO_THROW(p.interpret.render({{"org_sent", "t"}, {"rules", ""}}));
  EXPECT_NO_THROW(p.prosecute.render({{"text", "t"}, {"image", "<image>"}, {"note", "n"}}));
}

}  // namespace
}  // namespace prism
