#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "test_support.hpp"
#include "vsrag/errors.hpp"
#include "vsrag/index_io.hpp"
#include "vsrag/retrieval.hpp"

using namespace vsrag;

namespace {

EmbeddingVector unit_of(std::vector<double> v) { return normalize_embedding(std::span<const double>(v)); }

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = n(rng);
  return v;
}

std::vector<DocumentInput> random_docs(std::mt19937_64& rng, std::size_t count, std::size_t dim) {
  std::vector<DocumentInput> docs;
  for (std::size_t i = 0; i < count; ++i) {
    docs.push_back(DocumentInput{"doc-" + std::to_string(i), "text " + std::to_string(i), gaussian(rng, dim), {}});
  }
  return docs;
}

// Exhaustive oracle: score every document by its best query, full sort, take K.
std::vector<std::string> brute_force(const Index& index, const std::vector<EmbeddingVector>& queries, std::size_t k) {
  std::vector<std::pair<double, std::string>> all;
  for (const auto& d : index.documents()) {
    double best = -2.0;
    for (const auto& q : queries) {
      double dot = 0.0;
      for (std::size_t i = 0; i < q.values.size(); ++i) {
        dot += static_cast<double>(q.values[i]) * static_cast<double>(d.embedding.values[i]);
      }
      best = std::max(best, dot);
    }
    all.emplace_back(best, d.doc_id);
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) ids.push_back(all[i].second);
  return ids;
}

std::vector<std::string> ids_of(const std::vector<RetrievalResult>& r) {
  std::vector<std::string> ids;
  for (const auto& x : r) ids.push_back(x.doc.doc_id);
  return ids;
}

}  // namespace

TEST(Cosine, Examples) {
  const auto v = unit_of({1.0, 2.0, 3.0});
  EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-6);
  EXPECT_DOUBLE_EQ(cosine_similarity(unit_of({1, 0}), unit_of({0, 1})), 0.0);
  EXPECT_NEAR(cosine_similarity(EmbeddingVector{{0.6f, 0.8f}}, EmbeddingVector{{1.0f, 0.0f}}), 0.6, 1e-7);
}

TEST(Cosine, DimensionMismatchIsRejected) {
  EXPECT_THROW(cosine_similarity(unit_of({1, 0}), unit_of({1, 0, 0})), DataError);
}

TEST(Normalize, RejectsZeroAndNonFinite) {
  std::vector<double> zero{0.0, 0.0};
  EXPECT_THROW(normalize_embedding(std::span<const double>(zero)), DataError);
  std::vector<double> nan{std::nan(""), 1.0};
  EXPECT_THROW(normalize_embedding(std::span<const double>(nan)), DataError);
}

TEST(IndexBuild, SizeAndNormalization) {
  const Index idx = Index::build({{"a", "alpha", {3.0, 4.0}, {}}, {"b", "beta", {1.0, 0.0}, {}}, {"c", "gamma", {0.0, 2.0}, {}}});
  EXPECT_EQ(idx.size(), 3u);
  EXPECT_EQ(idx.dim(), 2u);
  EXPECT_NEAR(idx.at(0).embedding.values[0], 0.6, 1e-7);
  EXPECT_NEAR(idx.at(0).embedding.values[1], 0.8, 1e-7);
}

TEST(IndexBuild, RejectsDuplicatesZeroNormAndDimMismatch) {
  EXPECT_THROW(Index::build({{"a", "x", {1.0, 0.0}, {}}, {"a", "y", {0.0, 1.0}, {}}}), DataError);
  EXPECT_THROW(Index::build({{"a", "x", {0.0, 0.0}, {}}}), DataError);
  EXPECT_THROW(Index::build({{"a", "x", {1.0, 0.0}, {}}, {"b", "y", {1.0, 0.0, 0.0}, {}}}), DataError);
  EXPECT_THROW(Index::build({}), DataError);
  EXPECT_THROW(Index::build({{"a", "", {1.0}, {}}}), DataError);
}

TEST(TopK, SingleDocumentForAnyK) {
  const Index idx = Index::build({{"only", "t", {0.2, 0.9}, {}}});
  const std::vector<EmbeddingVector> q{unit_of({1, 0})};
  for (std::size_t k : {1u, 3u, 10u}) {
    const auto r = retrieve_top_k(idx, q, {k});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].doc.doc_id, "only");
  }
}

TEST(TopK, DocumentScoreIsMaxOverKeyframes) {
  // Query 0 scores the document 0.2, query 1 scores it 0.9.
  const double s = std::sqrt(1.0 - 0.2 * 0.2);
  const double t = std::sqrt(1.0 - 0.9 * 0.9);
  const Index idx = Index::build({{"d", "t", {1.0, 0.0, 0.0}, {}}});
  const std::vector<EmbeddingVector> q{unit_of({0.2, s, 0.0}), unit_of({0.9, 0.0, t})};
  const auto r = retrieve_top_k(idx, q, {1});
  EXPECT_NEAR(r[0].score, 0.9, 1e-6);
  EXPECT_EQ(r[0].best_keyframe_index, 1u);
}

TEST(TopK, TiesBreakByAscendingDocId) {
  const Index idx = Index::build({{"zeta", "t", {1.0, 0.0}, {}}, {"alpha", "t", {1.0, 0.0}, {}}, {"mid", "t", {1.0, 0.0}, {}}});
  const auto r = retrieve_top_k(idx, std::vector<EmbeddingVector>{unit_of({1, 0})}, {2});
  EXPECT_EQ(ids_of(r), (std::vector<std::string>{"alpha", "mid"}));
}

TEST(TopK, RejectsEmptyQueriesAndZeroK) {
  const Index idx = Index::build({{"a", "t", {1.0, 0.0}, {}}});
  EXPECT_THROW(retrieve_top_k(idx, {}, {3}), DataError);
  EXPECT_THROW(retrieve_top_k(idx, std::vector<EmbeddingVector>{unit_of({1, 0})}, {0}), ConfigError);
}

TEST(TopK, MatchesBruteForceOnRandomIndexes) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    const Index idx = Index::build(random_docs(rng, 1000, 32));
    std::vector<EmbeddingVector> q;
    for (int i = 0; i < 4; ++i) q.push_back(unit_of(gaussian(rng, 32)));
    for (std::size_t k : {1u, 3u, 10u}) {
      const auto r = retrieve_top_k(idx, q, {k});
      EXPECT_EQ(ids_of(r), brute_force(idx, q, k));
      for (std::size_t i = 1; i < r.size(); ++i) EXPECT_GE(r[i - 1].score, r[i].score);
    }
  }
}

TEST(TopK, ScaleInvariance) {
  std::mt19937_64 rng(5);
  auto docs = random_docs(rng, 200, 16);
  auto scaled = docs;
  std::uniform_real_distribution<double> factor(0.01, 100.0);
  for (auto& d : scaled) {
    const double f = factor(rng);
    for (auto& x : d.raw_embedding) x *= f;
  }
  std::vector<EmbeddingVector> q{unit_of(gaussian(rng, 16)), unit_of(gaussian(rng, 16))};
  const auto a = retrieve_top_k(Index::build(docs), q, {10});
  const auto b = retrieve_top_k(Index::build(scaled), q, {10});
  EXPECT_EQ(ids_of(a), ids_of(b));
}

TEST(TopK, PerKeyframeUnionAgreesWhenPerFrameLimitCoversK) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const Index idx = Index::build(random_docs(rng, 300, 12));
    std::vector<EmbeddingVector> q;
    for (int i = 0; i < 5; ++i) q.push_back(unit_of(gaussian(rng, 12)));
    for (std::size_t k : {1u, 3u, 7u}) {
      RetrievalOptions union_opts{k, RetrievalAggregation::per_keyframe_union, 0};
      EXPECT_EQ(ids_of(retrieve_top_k(idx, q, union_opts)), ids_of(retrieve_top_k(idx, q, {k})));
    }
  }
}

TEST(TopK, ParallelScoringMatchesSerialReference) {
  std::mt19937_64 rng(9);
  const Index idx = Index::build(random_docs(rng, 777, 24));
  std::vector<EmbeddingVector> q;
  for (int i = 0; i < 3; ++i) q.push_back(unit_of(gaussian(rng, 24)));
  const auto par = score_documents(idx, q);
  const auto ser = reference::score_documents_serial(idx, q);
  ASSERT_EQ(par.size(), ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    EXPECT_EQ(par[i].score, ser[i].score);
    EXPECT_EQ(par[i].best_query, ser[i].best_query);
  }
}

TEST(IndexIo, BinaryRoundTripIsExact) {
  std::mt19937_64 rng(4);
  auto docs = random_docs(rng, 20, 8);
  docs[3].metadata["source"] = "unit test";
  const Index idx = Index::build(docs, {{"corpus", "toy"}});
  vsrag::testing::TempDir dir;
  save_index(idx, dir.path() / "i.bin");
  const Index back = load_index(dir.path() / "i.bin");
  ASSERT_EQ(back.size(), idx.size());
  EXPECT_EQ(back.metadata(), idx.metadata());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    EXPECT_EQ(back.at(i).doc_id, idx.at(i).doc_id);
    EXPECT_EQ(back.at(i).text, idx.at(i).text);
    EXPECT_EQ(back.at(i).metadata, idx.at(i).metadata);
    EXPECT_EQ(back.at(i).embedding.values, idx.at(i).embedding.values);
  }
}

TEST(IndexIo, JsonlExportReimportsToTheSameIndex) {
  std::mt19937_64 rng(6);
  const Index idx = Index::build(random_docs(rng, 10, 8));
  std::stringstream buf;
  write_documents_jsonl(idx, buf);
  const Index back = Index::build(parse_documents_jsonl(buf));
  ASSERT_EQ(back.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    EXPECT_EQ(back.at(i).doc_id, idx.at(i).doc_id);
    EXPECT_EQ(back.at(i).text, idx.at(i).text);
    for (std::size_t j = 0; j < idx.dim(); ++j) {
      EXPECT_NEAR(back.at(i).embedding.values[j], idx.at(i).embedding.values[j], 1e-6);
    }
  }
}

TEST(IndexIo, CorruptFilesAreRejected) {
  std::stringstream bad("NOTANINDEX");
  EXPECT_THROW(read_index_binary(bad), DataError);
  std::stringstream bad_json("{\"doc_id\": \"a\"}\n");
  EXPECT_THROW(parse_documents_jsonl(bad_json), DataError);
}
