#include "vsrag/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <set>
#include <unordered_set>

#include "vsrag/errors.hpp"

namespace vsrag {

namespace {

template <typename T>
EmbeddingVector normalize_impl(std::span<const T> raw) {
  if (raw.empty()) throw DataError("embedding is empty");
  double sq = 0.0;
  for (T v : raw) {
    if (!std::isfinite(static_cast<double>(v))) throw DataError("embedding contains a non-finite value");
    sq += static_cast<double>(v) * static_cast<double>(v);
  }
  if (!(sq > 0.0)) throw DataError("zero-norm embedding");
  const double inv = 1.0 / std::sqrt(sq);
  EmbeddingVector out;
  out.values.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out.values[i] = static_cast<float>(static_cast<double>(raw[i]) * inv);
  return out;
}

double dot(const float* a, const float* b, std::size_t n) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

void check_queries(const Index& index, std::span<const EmbeddingVector> queries) {
  if (queries.empty()) throw DataError("retrieval needs at least one keyframe embedding");
  for (const auto& q : queries) {
    if (q.dim() != index.dim()) {
      throw DataError("query dim " + std::to_string(q.dim()) + " does not match index dim " +
                      std::to_string(index.dim()));
    }
  }
}

// Positions of the `k` best candidates: score descending, doc_id ascending on ties.
std::vector<std::size_t> top_positions(const Index& index, std::vector<std::size_t> candidates,
                                       const std::vector<DocumentScore>& scores, std::size_t k) {
  const auto before = [&](std::size_t a, std::size_t b) {
    if (scores[a].score != scores[b].score) return scores[a].score > scores[b].score;
    return index.at(a).doc_id < index.at(b).doc_id;
  };
  const std::size_t keep = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                    before);
  candidates.resize(keep);
  return candidates;
}

}  // namespace

EmbeddingVector normalize_embedding(std::span<const double> raw) { return normalize_impl(raw); }
EmbeddingVector normalize_embedding(std::span<const float> raw) { return normalize_impl(raw); }

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw DataError("embedding dims differ: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  return std::clamp(dot(a.values.data(), b.values.data(), a.dim()), -1.0, 1.0);
}

Index Index::build(std::vector<DocumentInput> docs, Metadata index_metadata) {
  std::vector<Document> normalized;
  normalized.reserve(docs.size());
  for (auto& d : docs) {
    EmbeddingVector e;
    try {
      e = normalize_embedding(std::span<const double>(d.raw_embedding));
    } catch (const DataError& err) {
      throw DataError("document '" + d.doc_id + "': " + err.what());
    }
    normalized.push_back(Document{std::move(d.doc_id), std::move(d.text), std::move(e), std::move(d.metadata)});
  }
  return from_documents(std::move(normalized), std::move(index_metadata));
}

Index Index::from_documents(std::vector<Document> docs, Metadata index_metadata) {
  if (docs.empty()) throw DataError("index needs at least one document");
  Index index;
  index.dim_ = docs.front().embedding.dim();
  std::unordered_set<std::string> seen;
  for (const auto& d : docs) {
    if (d.doc_id.empty()) throw DataError("document with empty doc_id");
    if (!seen.insert(d.doc_id).second) throw DataError("duplicate doc_id '" + d.doc_id + "'");
    if (d.text.empty()) throw DataError("document '" + d.doc_id + "' has empty text");
    if (d.embedding.dim() == 0) throw DataError("document '" + d.doc_id + "' has an empty embedding");
    if (d.embedding.dim() != index.dim_) {
      throw DataError("document '" + d.doc_id + "' has dim " + std::to_string(d.embedding.dim()) +
                      ", expected " + std::to_string(index.dim_));
    }
  }
  index.docs_ = std::move(docs);
  index.metadata_ = std::move(index_metadata);
  return index;
}

std::vector<DocumentScore> score_documents(const Index& index, std::span<const EmbeddingVector> queries) {
  check_queries(index, queries);
  const auto docs = index.documents();
  const std::size_t dim = index.dim();
  std::vector<DocumentScore> out(docs.size());
  const auto n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const float* e = docs[static_cast<std::size_t>(i)].embedding.values.data();
    DocumentScore best{dot(e, queries[0].values.data(), dim), 0};
    for (std::size_t q = 1; q < queries.size(); ++q) {
      const double s = dot(e, queries[q].values.data(), dim);
      if (s > best.score) best = DocumentScore{s, q};
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

std::vector<RetrievalResult> retrieve_top_k(const Index& index, std::span<const EmbeddingVector> keyframe_embeddings,
                                            const RetrievalOptions& options) {
  if (options.k == 0) throw ConfigError("retrieval k must be >= 1");
  const auto scores = score_documents(index, keyframe_embeddings);

  std::vector<std::size_t> all(index.size());
  std::iota(all.begin(), all.end(), std::size_t{0});

  std::vector<std::size_t> candidates;
  if (options.aggregation == RetrievalAggregation::max_over_keyframes) {
    candidates = std::move(all);
  } else {
    const std::size_t per_frame = options.per_keyframe_k == 0 ? options.k : options.per_keyframe_k;
    std::set<std::size_t> pooled;
    for (const auto& q : keyframe_embeddings) {
      const auto frame_scores = score_documents(index, std::span<const EmbeddingVector>(&q, 1));
      for (std::size_t pos : top_positions(index, all, frame_scores, per_frame)) pooled.insert(pos);
    }
    candidates.assign(pooled.begin(), pooled.end());
  }

  std::vector<RetrievalResult> results;
  for (std::size_t pos : top_positions(index, std::move(candidates), scores, options.k)) {
    results.push_back(RetrievalResult{index.at(pos), scores[pos].score, scores[pos].best_query});
  }
  return results;
}

}  // namespace vsrag
