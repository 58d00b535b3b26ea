#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "copilot/common/error.hpp"
#include "copilot/index/embedding.hpp"
#include "copilot/index/vector_index.hpp"
#include "support.hpp"

using namespace copilot;
using namespace copilot::index;

namespace {

std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim, bool coarse) {
  std::vector<float> v(dim);
  for (;;) {
    bool nonzero = false;
    for (auto& x : v) {
      if (coarse) {
        x = static_cast<float>(static_cast<int>(rng() % 5) - 2);
      } else {
        x = std::uniform_real_distribution<float>(-1.0f, 1.0f)(rng);
      }
      nonzero = nonzero || x != 0.0f;
    }
    if (nonzero) return v;
  }
}

}  // namespace

TEST(Embedding, MockMatchesBucketOracle) {
  MockEmbedder e(64);
  const std::vector<std::string> texts = {"How many heads of the departments are older than 56?",
                                          "Return on ad spend", "ROI roi RoI", "caf\xc3\xa9 > 3"};
  const auto vecs = e.embed(texts);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto expected = testsupport::oracle_mock_embedding(texts[i], 64);
    ASSERT_EQ(vecs[i].dimension(), 64u);
    for (std::size_t d = 0; d < 64; ++d) {
      EXPECT_NEAR(vecs[i].components()[d], expected[d], 1e-6) << texts[i] << " dim " << d;
    }
  }
}

TEST(Embedding, MockIsDeterministicAndUnitLength) {
  MockEmbedder e;
  const auto v = embed_texts({"abc", "abc"}, e);
  EXPECT_TRUE(v[0].bit_equal(v[1]));
  EXPECT_NEAR(v[0].norm(), 1.0, 1e-6);
  EXPECT_EQ(e.tag(), "mock-hash-64");
}

TEST(Embedding, DistinctTokensGiveDistinctVectors) {
  MockEmbedder e;
  const auto v = e.embed({"a", "b"});
  const auto oa = testsupport::oracle_mock_embedding("a", 64);
  const auto ob = testsupport::oracle_mock_embedding("b", 64);
  ASSERT_NE(oa, ob);
  EXPECT_FALSE(v[0].bit_equal(v[1]));
}

TEST(Embedding, TokenlessTextIsProviderError) {
  MockEmbedder e;
  EXPECT_THROW(e.embed({"   "}), ProviderError);
}

TEST(Embedding, RejectsNonFiniteComponents) {
  EXPECT_THROW(EmbeddingVector({1.0f, NAN}), ProviderContractViolation);
  EXPECT_THROW(EmbeddingVector(std::vector<float>{}), ProviderContractViolation);
}

TEST(Cosine, HandComputedValues) {
  const EmbeddingVector v({0.3f, -0.2f, 0.9f});
  EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-12);
  EXPECT_NEAR(cosine_similarity(EmbeddingVector({1, 0}), EmbeddingVector({0, 1})), 0.0, 1e-12);
  EXPECT_NEAR(cosine_similarity(EmbeddingVector({1, 1}), EmbeddingVector({1, 0})), 1.0 / std::sqrt(2.0),
              1e-4);
}

TEST(Cosine, Errors) {
  EXPECT_THROW(cosine_similarity(EmbeddingVector({1, 0}), EmbeddingVector({1, 0, 0})),
               DimensionError);
  EXPECT_THROW(cosine_similarity(EmbeddingVector({0, 0}), EmbeddingVector({1, 0})),
               DegenerateVector);
}

TEST(VectorIndexTest, EmptyIndexReturnsNothing) {
  VectorIndex idx(2, "t");
  EXPECT_TRUE(idx.top_k(EmbeddingVector({1, 0}), 3).empty());
}

TEST(VectorIndexTest, SelfRetrievalAndErrors) {
  VectorIndex idx(2, "t");
  idx.add({"a", EmbeddingVector({1, 0})});
  idx.add({"b", EmbeddingVector({0.6f, 0.8f})});
  const auto hits = idx.top_k(EmbeddingVector({0.6f, 0.8f}), 1);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].chunk_id, "b");
  EXPECT_NEAR(hits[0].score, 1.0, 1e-6);
  EXPECT_THROW(idx.top_k(EmbeddingVector({1, 0, 0}), 1), DimensionError);
  EXPECT_THROW(idx.add({"a", EmbeddingVector({0, 1})}), ConfigError);
  EXPECT_THROW(idx.add({"z", EmbeddingVector({0, 0})}), DegenerateVector);
  EXPECT_THROW(idx.top_k(EmbeddingVector({1, 0}), 0), ConfigError);
}

TEST(VectorIndexTest, TiesBreakByChunkId) {
  VectorIndex idx(2, "t");
  for (const char* id : {"c", "a", "b"}) idx.add({id, EmbeddingVector({1, 1})});
  const auto hits = idx.top_k(EmbeddingVector({1, 1}), 3);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].chunk_id, "a");
  EXPECT_EQ(hits[1].chunk_id, "b");
  EXPECT_EQ(hits[2].chunk_id, "c");
}

// Property: top_k agrees with an exhaustive scan, including tie order. Half
// the indices use small-integer components so exact ties are common.
TEST(VectorIndexProperty, TopKMatchesBruteForceOn500Indices) {
  std::mt19937_64 rng(99);
  std::size_t tie_cases = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const bool coarse = trial % 2 == 0;
    const std::size_t dim = coarse ? 3 + rng() % 4 : 8 + rng() % 57;
    const std::size_t n = 1 + rng() % 1000;
    VectorIndex idx(static_cast<std::uint32_t>(dim), "prop");
    std::vector<std::pair<std::string, std::vector<float>>> records;
    for (std::size_t i = 0; i < n; ++i) {
      auto v = random_vector(rng, dim, coarse);
      const std::string id = "c" + std::to_string(rng() % 100000) + "-" + std::to_string(i);
      idx.add({id, EmbeddingVector(v)});
      records.emplace_back(id, std::move(v));
    }
    const auto q = random_vector(rng, dim, coarse);
    const std::size_t k = 1 + rng() % 20;
    const auto got = idx.top_k(EmbeddingVector(q), k);
    const auto want = testsupport::oracle_top_k(records, q, k);
    ASSERT_EQ(got.size(), want.size()) << "trial " << trial;
    for (std::size_t i = 0; i < got.size(); ++i) {
      ASSERT_EQ(got[i].chunk_id, want[i].id) << "trial " << trial << " rank " << i;
      ASSERT_NEAR(got[i].score, want[i].score, 1e-12);
      if (i > 0 && want[i].score == want[i - 1].score) ++tie_cases;
    }
  }
  EXPECT_GT(tie_cases, 100u);
}

TEST(VectorIndexProperty, EveryRecordIsItsOwnTopHit) {
  std::mt19937_64 rng(7);
  VectorIndex idx(32, "prop");
  std::vector<std::vector<float>> vs;
  for (int i = 0; i < 1000; ++i) {
    vs.push_back(random_vector(rng, 32, false));
    idx.add({"r" + std::to_string(i), EmbeddingVector(vs.back())});
  }
  for (int i = 0; i < 1000; ++i) {
    const auto hit = idx.top_k(EmbeddingVector(vs[i]), 1);
    ASSERT_EQ(hit[0].chunk_id, "r" + std::to_string(i));
    ASSERT_NEAR(hit[0].score, 1.0, 1e-6);
  }
}

TEST(IndexFile, EmptyIndexRoundTrip) {
  testsupport::TempDir dir;
  VectorIndex idx(16, "mock-hash-16");
  save_index(idx, dir.file("e.vidx"));
  EXPECT_EQ(load_index(dir.file("e.vidx")), idx);
}

TEST(IndexFile, ThousandRecordsBitExact) {
  testsupport::TempDir dir;
  std::mt19937_64 rng(1);
  VectorIndex idx(64, "mock-hash-64");
  for (int i = 0; i < 1000; ++i) {
    idx.add({"doc-" + std::to_string(i) + "#0", EmbeddingVector(random_vector(rng, 64, false))});
  }
  save_index(idx, dir.file("i.vidx"));
  const auto loaded = load_index(dir.file("i.vidx"));
  ASSERT_EQ(loaded.size(), idx.size());
  EXPECT_EQ(loaded.provider_tag(), "mock-hash-64");
  for (std::size_t i = 0; i < idx.size(); ++i) {
    EXPECT_EQ(loaded.records()[i].chunk_id, idx.records()[i].chunk_id);
    const auto& a = loaded.records()[i].vector.components();
    const auto& b = idx.records()[i].vector.components();
    ASSERT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)), 0);
  }
  EXPECT_TRUE(std::filesystem::exists(meta_path_for(dir.file("i.vidx"))));
}

TEST(IndexFile, CorruptionIsDetected) {
  testsupport::TempDir dir;
  VectorIndex idx(4, "t");
  idx.add({"a", EmbeddingVector({1, 2, 3, 4})});
  save_index(idx, dir.file("x.vidx"));
  const std::string bytes = testsupport::slurp(dir.file("x.vidx"));
  {
    std::ofstream out(dir.file("trunc.vidx"), std::ios::binary);
    out << bytes.substr(0, bytes.size() - 3);
  }
  EXPECT_THROW(load_index(dir.file("trunc.vidx")), IndexFormatError);
  {
    std::ofstream out(dir.file("magic.vidx"), std::ios::binary);
    out << "XXXX" << bytes.substr(4);
  }
  EXPECT_THROW(load_index(dir.file("magic.vidx")), IndexFormatError);
}
