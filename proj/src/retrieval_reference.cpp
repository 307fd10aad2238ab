#include "vsrag/errors.hpp"
#include "vsrag/retrieval.hpp"

namespace vsrag::reference {

std::vector<DocumentScore> score_documents_serial(const Index& index, std::span<const EmbeddingVector> queries) {
  if (queries.empty()) throw DataError("retrieval needs at least one keyframe embedding");
  std::vector<DocumentScore> out;
  out.reserve(index.size());
  for (const auto& doc : index.documents()) {
    DocumentScore best{-2.0, 0};
    for (std::size_t q = 0; q < queries.size(); ++q) {
      if (queries[q].dim() != doc.embedding.dim()) throw DataError("query dim does not match index dim");
      double s = 0.0;
      for (std::size_t i = 0; i < doc.embedding.dim(); ++i) {
        s += static_cast<double>(doc.embedding.values[i]) * static_cast<double>(queries[q].values[i]);
      }
      if (s > best.score) best = DocumentScore{s, q};
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace vsrag::reference
