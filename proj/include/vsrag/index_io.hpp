#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "vsrag/retrieval.hpp"

namespace vsrag {

// Binary layout, all integers little-endian:
//   "VSRAGIDX" | u32 version(=1) | u32 dim | u64 count | u32 len + index metadata (JSON object)
//   count x { u32 len + doc_id | u32 len + text | u32 len + metadata (JSON object) | dim x f32 }
void save_index(const Index& index, const std::filesystem::path& path);
Index load_index(const std::filesystem::path& path);

void write_index_binary(const Index& index, std::ostream& out);
Index read_index_binary(std::istream& in);

/// One JSON object per line: {"doc_id", "text", "embedding"?, "metadata"?}.
/// Lines without an embedding come back with an empty raw_embedding.
std::vector<DocumentInput> read_documents_jsonl(const std::filesystem::path& path);
std::vector<DocumentInput> parse_documents_jsonl(std::istream& in);
void write_documents_jsonl(const Index& index, std::ostream& out);
void export_index_jsonl(const Index& index, const std::filesystem::path& path);

}  // namespace vsrag
