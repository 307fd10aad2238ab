#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace vsrag {

/// Unit-norm embedding. Construct through `normalize_embedding` to uphold the norm invariant.
struct EmbeddingVector {
  std::vector<float> values;

  std::size_t dim() const noexcept { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

/// L2-normalizes `raw`. Throws DataError on an empty or zero-norm vector.
EmbeddingVector normalize_embedding(std::span<const double> raw);
EmbeddingVector normalize_embedding(std::span<const float> raw);

/// Dot product of two unit vectors. Throws DataError on dimension mismatch.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

using Metadata = std::map<std::string, std::string>;

struct Document {
  std::string doc_id;
  std::string text;
  EmbeddingVector embedding;
  Metadata metadata;
};

/// Raw ingestion record; the embedding is normalized by `Index::build`.
struct DocumentInput {
  std::string doc_id;
  std::string text;
  std::vector<double> raw_embedding;
  Metadata metadata;
};

/// Flat, write-once document index. Safe for concurrent readers.
class Index {
 public:
  /// Throws DataError on empty input, duplicate doc_id, empty text, zero-norm or dim mismatch.
  static Index build(std::vector<DocumentInput> docs, Metadata index_metadata = {});

  /// Adopts already-normalized documents (used when loading a persisted index). Same checks as build.
  static Index from_documents(std::vector<Document> docs, Metadata index_metadata = {});

  std::size_t size() const noexcept { return docs_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return docs_.empty(); }
  std::span<const Document> documents() const noexcept { return docs_; }
  const Document& at(std::size_t i) const { return docs_.at(i); }
  const Metadata& metadata() const noexcept { return metadata_; }

 private:
  Index() = default;
  std::vector<Document> docs_;
  std::size_t dim_ = 0;
  Metadata metadata_;
};

struct RetrievalResult {
  Document doc;
  double score = 0.0;
  std::size_t best_keyframe_index = 0;
};

enum class RetrievalAggregation {
  max_over_keyframes,  ///< score each document by its best keyframe, then take the global top-K
  per_keyframe_union,  ///< top-k per keyframe, union, then the global top-K of the union
};

struct RetrievalOptions {
  std::size_t k = 3;
  RetrievalAggregation aggregation = RetrievalAggregation::max_over_keyframes;
  std::size_t per_keyframe_k = 0;  ///< 0 means "same as k"
};

/// Best score of one document over a set of query embeddings.
struct DocumentScore {
  double score = 0.0;
  std::size_t best_query = 0;
};

/// Max-over-queries score for every indexed document; parallel over documents (OpenMP).
std::vector<DocumentScore> score_documents(const Index& index, std::span<const EmbeddingVector> queries);

/// Top-K documents, scores descending, ties by ascending doc_id.
/// Throws ConfigError on k == 0, DataError on empty queries or query dim mismatch.
std::vector<RetrievalResult> retrieve_top_k(const Index& index, std::span<const EmbeddingVector> keyframe_embeddings,
                                            const RetrievalOptions& options = {});

namespace reference {
std::vector<DocumentScore> score_documents_serial(const Index& index, std::span<const EmbeddingVector> queries);
}  // namespace reference

}  // namespace vsrag
