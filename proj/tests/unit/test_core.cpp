#include <gtest/gtest.h>

#include <cctype>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "prism/core/labels.hpp"
#include "prism/core/manifest.hpp"
#include "prism/core/text.hpp"
#include "prism/core/types.hpp"
#include "prism/errors.hpp"

namespace prism {
namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name, const std::string& content) {
  const fs::path dir = fs::temp_directory_path() / "prism_test_core";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << content;
  return p;
}

TEST(NormalizeLabel, HarmGradesMergeIntoHarmful) {
  EXPECT_EQ(normalize_label("partially harmful", LabelScheme::HarM), Verdict::Harmful);
  EXPECT_EQ(normalize_label("very harmful", LabelScheme::HarM), Verdict::Harmful);
  EXPECT_EQ(normalize_label("harmless", LabelScheme::HarM), Verdict::Harmless);
}

TEST(NormalizeLabel, BinaryIdentityAndCasing) {
  EXPECT_EQ(normalize_label("harmless", LabelScheme::Binary), Verdict::Harmless);
  EXPECT_EQ(normalize_label("HARMFUL  ", LabelScheme::Binary), Verdict::Harmful);
  EXPECT_EQ(normalize_label("\tVery Harmful\n", LabelScheme::HarM), Verdict::Harmful);
}

TEST(NormalizeLabel, UnknownLabelsCarryRawText) {
  try {
    normalize_label("harmful", LabelScheme::HarM);
    FAIL() << "expected UnknownLabel";
  } catch (const UnknownLabel& e) {
    EXPECT_EQ(e.raw(), "harmful");
  }
  EXPECT_THROW(normalize_label("offensive", LabelScheme::Binary), UnknownLabel);
  EXPECT_THROW(normalize_label("", LabelScheme::Binary), UnknownLabel);
}

TEST(NormalizeLabel, IdempotentUnderTrimmingAndCasing) {
  for (std::string raw : {"harmless", "very harmful", "partially harmful"}) {
    std::string shouted = "  " + raw + "\t";
    for (char& c : shouted) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    EXPECT_EQ(normalize_label(shouted, LabelScheme::HarM), normalize_label(raw, LabelScheme::HarM));
  }
}

TEST(LabelScheme, ParsesNames) {
  EXPECT_EQ(label_scheme_from_string("harm"), LabelScheme::HarM);
  EXPECT_EQ(label_scheme_from_string("Binary"), LabelScheme::Binary);
  EXPECT_THROW(label_scheme_from_string("multi"), InputError);
}

TEST(Verdict, SerializesLowercaseAndRoundTrips) {
  EXPECT_EQ(to_string(Verdict::Harmful), "harmful");
  EXPECT_EQ(to_string(Verdict::Harmless), "harmless");
  for (Verdict v : {Verdict::Harmful, Verdict::Harmless}) EXPECT_EQ(verdict_from_string(to_string(v)), v);
  EXPECT_THROW(verdict_from_string("Harmful"), InputError);
}

TEST(Variant, IdsAndSuffixes) {
  EXPECT_EQ(variant_id("q1", VariantKind::Original), "q1#ori");
  EXPECT_EQ(variant_id("q1", VariantKind::Benevolent), "q1#b");
  EXPECT_EQ(variant_id("q1", VariantKind::Malicious), "q1#m");
  for (VariantKind v : kAllVariants) EXPECT_EQ(variant_from_suffix(variant_suffix(v)), v);
  EXPECT_THROW(variant_from_suffix("x"), InputError);
}

TEST(Meme, RequiresId) {
  EXPECT_THROW(make_meme("", "a.png", "t"), InputError);
  EXPECT_EQ(make_meme("a", "a.png", "").text, "");
}

TEST(VariantSet, GetReturnsPresentVariants) {
  VariantSet vs{make_meme("q", "i.png", "t"), std::nullopt, make_meme("q#m", "i.png", "bad")};
  EXPECT_EQ(vs.get(VariantKind::Original)->text, "t");
  EXPECT_EQ(vs.get(VariantKind::Benevolent), nullptr);
  EXPECT_EQ(vs.get(VariantKind::Malicious)->text, "bad");
}

TEST(Manifest, LoadsFixtureAndResolvesImages) {
  const auto m = load_manifest(testing::fixture_dir() / "manifest.jsonl");
  ASSERT_EQ(m.size(), 4u);
  EXPECT_EQ(m.rows()[0].meme.id, "q1");
  for (const auto& row : m.rows()) {
    EXPECT_TRUE(row.image_readable) << row.meme.image_ref;
    EXPECT_TRUE(fs::exists(row.meme.image_ref));
  }
  const auto gold = m.gold(LabelScheme::HarM);
  EXPECT_EQ(gold.at("q1"), Verdict::Harmful);
  EXPECT_EQ(gold.at("q2"), Verdict::Harmful);
  EXPECT_EQ(gold.at("q3"), Verdict::Harmless);
  EXPECT_EQ(gold.at("q4"), Verdict::Harmless);
}

TEST(Manifest, CorpusLabelsMayBeNull) {
  const auto m = load_manifest(testing::fixture_dir() / "corpus.jsonl");
  EXPECT_EQ(m.size(), 8u);
  EXPECT_TRUE(m.gold(LabelScheme::Binary).empty());
}

TEST(Manifest, RejectsDuplicateAndEmptyIds) {
  EXPECT_THROW(load_manifest(temp_file("dup.jsonl", R"({"id":"a","image":"x.png","text":""}
{"id":"a","image":"y.png","text":""}
)")),
               InputError);
  EXPECT_THROW(load_manifest(temp_file("empty.jsonl", R"({"id":"","image":"x.png","text":""})"
                                                      "\n")),
               InputError);
  EXPECT_THROW(load_manifest(temp_file("bad.jsonl", "{not json}\n")), InputError);
}

TEST(Manifest, UnreadableImageIsFlaggedNotDropped) {
  const auto m = load_manifest(temp_file("missing.jsonl", R"({"id":"a","image":"nowhere.png","text":"hi"})"
                                                          "\n"));
  ASSERT_EQ(m.size(), 1u);
  EXPECT_FALSE(m.rows()[0].image_readable);
}

TEST(MemeCatalog, LooksUpById) {
  MemeCatalog catalog(std::vector<Meme>{make_meme("a", "a.png", "x"), make_meme("b", "b.png", "y")});
  EXPECT_EQ(catalog.at("b").text, "y");
  EXPECT_EQ(catalog.find("c"), nullptr);
  EXPECT_THROW(catalog.at("c"), InputError);
}

TEST(Text, Helpers) {
  EXPECT_EQ(text::trim("  a b \n"), "a b");
  EXPECT_EQ(text::to_lower("AbC"), "abc");
  EXPECT_EQ(text::rfind_icase("Answer: x ANSWER: y", "answer:"), 10u);
  EXPECT_EQ(text::find_icase("xxAnSwEr", "answer"), 2u);
  EXPECT_TRUE(text::starts_with_icase("Rewrite: hi", "rewrite:"));
}

}  // namespace
}  // namespace prism
