#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "oracles.hpp"
#include "prism/errors.hpp"
#include "prism/retrieval/embedding_file.hpp"
#include "prism/retrieval/fusion.hpp"
#include "prism/retrieval/index.hpp"

namespace prism {
namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "prism_test_retrieval";
  fs::create_directories(dir);
  return dir / name;
}

fs::path temp_file(const std::string& name, const std::string& content) {
  const auto p = temp_path(name);
  std::ofstream(p) << content;
  return p;
}

std::vector<float> random_vector(std::mt19937& rng, std::size_t dim) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  std::vector<float> v(dim);
  for (float& x : v) x = n(rng);
  return v;
}

TEST(Fuse, OrthogonalUnitModalities) {
  const auto f = fuse({"x", {1, 0}, {0, 1}}, FusionWeights(0.8f, 0.2f));
  ASSERT_EQ(f.size(), 2u);
  EXPECT_NEAR(f[0], 0.8 / std::sqrt(0.68), 1e-6);
  EXPECT_NEAR(f[1], 0.2 / std::sqrt(0.68), 1e-6);
  EXPECT_NEAR(f[0], 0.97014, 1e-4);
  EXPECT_NEAR(f[1], 0.24254, 1e-4);
}

TEST(Fuse, IdenticalDirectionsAreANoOp) {
  for (auto [a, b] : {std::pair{0.8f, 0.2f}, std::pair{0.5f, 0.5f}, std::pair{1.0f, 0.0f}}) {
    const auto f = fuse({"x", {3, 4}, {3, 4}}, FusionWeights(a, b));
    EXPECT_NEAR(f[0], 0.6, 1e-6);
    EXPECT_NEAR(f[1], 0.8, 1e-6);
  }
}

TEST(Fuse, ZeroModalityIsRejected) {
  EXPECT_THROW(fuse({"x", {2, 0}, {0, 0}}, FusionWeights()), ZeroVector);
  EXPECT_THROW(fuse({"x", {0, 0}, {1, 0}}, FusionWeights()), ZeroVector);
  // opposite directions cancelling exactly
  EXPECT_THROW(fuse({"x", {1, 0}, {-1, 0}}, FusionWeights(0.5f, 0.5f)), ZeroVector);
}

TEST(Fuse, ScaleInvariantPerModality) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<float> scale(0.01f, 100.0f);
  for (int i = 0; i < 200; ++i) {
    ModalEmbeddings m{"x", random_vector(rng, 16), random_vector(rng, 16)};
    ModalEmbeddings scaled = m;
    const float c1 = scale(rng), c2 = scale(rng);
    for (float& x : scaled.visual) x *= c1;
    for (float& x : scaled.textual) x *= c2;
    const auto a = fuse(m, FusionWeights());
    const auto b = fuse(scaled, FusionWeights());
    for (std::size_t d = 0; d < a.size(); ++d) ASSERT_NEAR(a[d], b[d], 1e-6);
  }
}

TEST(Fuse, DimensionMismatch) {
  EXPECT_THROW(fuse({"x", {1, 0}, {1, 0, 0}}, FusionWeights()), DimensionMismatch);
}

TEST(FusionWeights, Validation) {
  EXPECT_FLOAT_EQ(FusionWeights().alpha(), 0.8f);
  EXPECT_FLOAT_EQ(FusionWeights().beta(), 0.2f);
  EXPECT_THROW(FusionWeights(0.7f, 0.2f), PreconditionError);
  EXPECT_THROW(FusionWeights(1.2f, -0.2f), PreconditionError);
  EXPECT_NO_THROW(FusionWeights(0.3f, 0.7f));
}

TEST(Cosine, Examples) {
  const std::vector<float> a{1, 0}, b{0, 1};
  EXPECT_FLOAT_EQ(cosine(a, a), 1.0f);
  EXPECT_FLOAT_EQ(cosine(a, b), 0.0f);
  const std::vector<float> f{0.97014f, 0.24254f}, g{0.6f, 0.8f};
  EXPECT_NEAR(cosine(f, g), 0.77612, 1e-5);
  const std::vector<float> three{1, 0, 0};
  EXPECT_THROW(cosine(a, three), DimensionMismatch);
}

TEST(Cosine, ClampsRoundingOvershoot) {
  const auto v = testing::normalized({1, 1, 1, 1, 1, 1, 1});
  const float c = cosine(v, v);
  EXPECT_LE(c, 1.0f);
  EXPECT_GE(c, 0.9999f);
}

FusedIndex small_index() {
  std::vector<IndexEntry> entries = {{"b", {0, 1}}, {"a", {1, 0}}, {"c", testing::normalized({1, 1})}};
  return FusedIndex::from_entries(std::move(entries), 2, FusionWeights(), "test");
}

TEST(TopK, ExactMatchComesFirst) {
  const auto index = small_index();
  const std::vector<float> q{1, 0};
  const auto ev = index.top_k(q, 3);
  ASSERT_EQ(ev.size(), 3u);
  EXPECT_EQ(ev.hits[0].meme_id, "a");
  EXPECT_FLOAT_EQ(ev.hits[0].similarity, 1.0f);
  EXPECT_EQ(ev.hits[1].meme_id, "c");
}

TEST(TopK, TruncatesToCorpusSize) {
  auto index = FusedIndex::from_entries({{"x", {1, 0}}, {"y", {0, 1}}}, 2, FusionWeights(), "t");
  const std::vector<float> q{1, 0};
  EXPECT_EQ(index.top_k(q, 3).size(), 2u);
}

TEST(TopK, TiesBreakById) {
  auto index = FusedIndex::from_entries({{"z", {1, 0}}, {"m", {1, 0}}, {"a", {1, 0}}}, 2, FusionWeights(), "t");
  const std::vector<float> q{1, 0};
  const auto ev = index.top_k(q, 3);
  EXPECT_EQ(ev.hits[0].meme_id, "a");
  EXPECT_EQ(ev.hits[1].meme_id, "m");
  EXPECT_EQ(ev.hits[2].meme_id, "z");
}

TEST(TopK, ExcludesQueryId) {
  const auto index = small_index();
  const std::vector<float> q{1, 0};
  const auto ev = index.top_k(q, 3, std::string_view("a"));
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev.hits[0].meme_id, "c");
  // absent ids exclude nothing
  EXPECT_EQ(index.top_k(q, 3, std::string_view("nope")).size(), 3u);
}

TEST(TopK, Errors) {
  FusedIndex empty;
  const std::vector<float> q{1, 0};
  EXPECT_THROW(empty.top_k(q, 1), EmptyIndex);
  EXPECT_THROW(small_index().top_k(q, 0), PreconditionError);
  const std::vector<float> q3{1, 0, 0};
  EXPECT_THROW(small_index().top_k(q3, 1), DimensionMismatch);
}

TEST(TopK, MatchesBruteForceOracle) {
  std::mt19937 rng(12345);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = trial % 2 == 0 ? 8 : 512;
    const std::size_t n = 1 + rng() % 64;
    std::vector<ModalEmbeddings> records;
    for (std::size_t i = 0; i < n; ++i) {
      records.push_back({"m" + std::to_string(rng() % 1000) + "_" + std::to_string(i), random_vector(rng, dim),
                         random_vector(rng, dim)});
    }
    // duplicate a vector under another id to force ties
    if (n > 1) records[n - 1] = {"dup" + std::to_string(trial), records[0].visual, records[0].textual};
    const auto index = FusedIndex::build(records, FusionWeights(), "rand");

    std::vector<std::pair<std::string, std::vector<float>>> corpus;
    for (const auto& e : index.entries()) corpus.emplace_back(e.id, e.vector);
    const auto query = fuse({"q", random_vector(rng, dim), random_vector(rng, dim)}, FusionWeights());
    const std::size_t k = 1 + rng() % n;

    const auto got = index.top_k(query, k);
    const auto want = testing::brute_force_top_k(corpus, query, k);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      ASSERT_EQ(got.hits[i].meme_id, want[i].id) << "trial " << trial << " rank " << i;
      ASSERT_EQ(got.hits[i].similarity, want[i].similarity);
    }
  }
}

TEST(TopK, SmallerKIsPrefix) {
  std::mt19937 rng(99);
  std::vector<ModalEmbeddings> records;
  for (int i = 0; i < 30; ++i) records.push_back({"r" + std::to_string(i), random_vector(rng, 8), random_vector(rng, 8)});
  const auto index = FusedIndex::build(records, FusionWeights(), "rand");
  const auto query = fuse({"q", random_vector(rng, 8), random_vector(rng, 8)}, FusionWeights());
  for (std::size_t k = 1; k < 30; ++k) {
    const auto a = index.top_k(query, k);
    const auto b = index.top_k(query, k + 1);
    for (std::size_t i = 0; i < k; ++i) ASSERT_EQ(a.hits[i], b.hits[i]);
  }
}

TEST(TopK, FullKIsSortedPermutation) {
  std::mt19937 rng(5);
  std::vector<ModalEmbeddings> records;
  for (int i = 0; i < 20; ++i) records.push_back({"r" + std::to_string(i), random_vector(rng, 8), random_vector(rng, 8)});
  const auto index = FusedIndex::build(records, FusionWeights(), "rand");
  const auto ev = index.top_k(index.entries()[3].vector, 20);
  ASSERT_EQ(ev.size(), 20u);
  for (std::size_t i = 1; i < ev.size(); ++i) {
    ASSERT_TRUE(ev.hits[i - 1].similarity > ev.hits[i].similarity ||
                (ev.hits[i - 1].similarity == ev.hits[i].similarity && ev.hits[i - 1].meme_id < ev.hits[i].meme_id));
  }
}

TEST(FusedIndex, EntriesSortedAndUnitNorm) {
  std::mt19937 rng(1);
  std::vector<ModalEmbeddings> records;
  for (const char* id : {"d", "b", "a", "c"}) records.push_back({id, random_vector(rng, 8), random_vector(rng, 8)});
  const auto index = FusedIndex::build(records, FusionWeights(), "rand");
  ASSERT_EQ(index.size(), 4u);
  for (std::size_t i = 1; i < index.size(); ++i) EXPECT_LT(index.entries()[i - 1].id, index.entries()[i].id);
  for (const auto& e : index.entries()) {
    double n = 0;
    for (float x : e.vector) n += static_cast<double>(x) * x;
    EXPECT_NEAR(std::sqrt(n), 1.0, 1e-5);
  }
}

TEST(FusedIndex, RejectsDuplicatesAndNonUnitEntries) {
  EXPECT_THROW(FusedIndex::build({{"a", {1, 0}, {0, 1}}, {"a", {0, 1}, {1, 0}}}, FusionWeights(), "t"), InputError);
  EXPECT_THROW(FusedIndex::from_entries({{"a", {2, 0}}}, 2, FusionWeights(), "t"), InputError);
}

TEST(EmbeddingFile, LoadsFixtureCorpus) {
  const auto file = load_embedding_file(testing::fixture_dir() / "corpus_embeddings.jsonl");
  EXPECT_EQ(file.header.dim, 8u);
  EXPECT_EQ(file.header.count, 8u);
  EXPECT_EQ(file.header.encoder, "fixture-dim8");
  ASSERT_EQ(file.records.size(), 8u);
  for (const auto& r : file.records) {
    EXPECT_EQ(r.visual.size(), 8u);
    EXPECT_EQ(r.textual.size(), 8u);
  }
}

TEST(EmbeddingFile, VariantFileHasThreeTextRecordsPerMemeSharingVisual) {
  const auto file = load_embedding_file(testing::fixture_dir() / "variant_embeddings.jsonl");
  std::map<std::string, std::vector<const ModalEmbeddings*>> by_base;
  for (const auto& r : file.records) by_base[r.id.substr(0, r.id.find('#'))].push_back(&r);
  ASSERT_EQ(by_base.size(), 4u);
  for (const auto& [base, recs] : by_base) {
    ASSERT_EQ(recs.size(), 3u) << base;
    EXPECT_EQ(recs[0]->visual, recs[1]->visual);
    EXPECT_EQ(recs[0]->visual, recs[2]->visual);
  }
}

TEST(EmbeddingFile, RoundTripsExactly) {
  std::mt19937 rng(3);
  EmbeddingFile file;
  file.header = {4, "enc", 3, 1};
  for (int i = 0; i < 3; ++i) file.records.push_back({"id" + std::to_string(i), random_vector(rng, 4), random_vector(rng, 4)});
  const auto p = temp_path("roundtrip.jsonl");
  write_embedding_file(p, file);
  const auto back = load_embedding_file(p);
  ASSERT_EQ(back.records.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.records[i].id, file.records[i].id);
    EXPECT_EQ(back.records[i].visual, file.records[i].visual);
    EXPECT_EQ(back.records[i].textual, file.records[i].textual);
  }
}

TEST(EmbeddingFile, RejectsMalformedInput) {
  const std::string header = R"({"dim": 2, "encoder": "e", "count": 1, "version": 1})";
  EXPECT_THROW(load_embedding_file(temp_file("count.jsonl", header + "\n")), InputError);
  EXPECT_THROW(load_embedding_file(temp_file("dim.jsonl", header + "\n" + R"({"id":"a","visual":[1,0,0],"textual":[1,0]})" + "\n")),
               InputError);
  EXPECT_THROW(load_embedding_file(temp_file("zero.jsonl", header + "\n" + R"({"id":"a","visual":[0,0],"textual":[1,0]})" + "\n")),
               Error);
  EXPECT_THROW(load_embedding_file(temp_file("version.jsonl", R"({"dim": 2, "encoder": "e", "count": 0, "version": 2})" "\n")),
               InputError);
  EXPECT_THROW(load_embedding_file(temp_file("nojson.jsonl", "hello\n")), InputError);
  EXPECT_THROW(load_embedding_file(temp_path("does_not_exist.jsonl")), InputError);
}

TEST(IndexFile, RoundTripsFusedVectors) {
  const auto file = load_embedding_file(testing::fixture_dir() / "corpus_embeddings.jsonl");
  const auto index = FusedIndex::build(file.records, FusionWeights(0.7f, 0.3f), file.header.encoder);
  const auto p = temp_path("index.jsonl");
  write_index_file(p, index);
  const auto back = load_index_file(p);
  EXPECT_EQ(back.size(), index.size());
  EXPECT_EQ(back.dim(), index.dim());
  EXPECT_EQ(back.encoder_name(), index.encoder_name());
  EXPECT_TRUE(back.weights() == index.weights());
  for (std::size_t i = 0; i < index.size(); ++i) {
    EXPECT_EQ(back.entries()[i].id, index.entries()[i].id);
    EXPECT_EQ(back.entries()[i].vector, index.entries()[i].vector);
  }
}

TEST(QueryEmbeddings, MergesFilesAndRejectsClashes) {
  QueryEmbeddings q;
  q.add(load_embedding_file(testing::fixture_dir() / "query_embeddings.jsonl"));
  q.add(load_embedding_file(testing::fixture_dir() / "variant_embeddings.jsonl"));
  EXPECT_EQ(q.size(), 16u);
  EXPECT_EQ(q.dim(), 8u);
  ASSERT_NE(q.find("q2#b"), nullptr);
  ASSERT_NE(q.find("q2"), nullptr);
  EXPECT_EQ(q.find("q9"), nullptr);
  EXPECT_THROW(q.add(load_embedding_file(testing::fixture_dir() / "query_embeddings.jsonl")), InputError);
}

}  // namespace
}  // namespace prism
