#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vsrag/backend.hpp"
#include "vsrag/retrieval.hpp"

namespace vsrag {

struct QAItem {
  std::string item_id;
  std::filesystem::path frame_dir;
  std::string question;
  std::vector<std::string> gold_answers;
  std::vector<std::string> tags;
};

/// Manifest:
///   {"index": "index.bin"?, "documents": "docs.jsonl"?,
///    "items": [{"item_id", "frame_dir", "question", "gold_answers": [...], "tags": [...]?}]}
/// Paths are relative to the manifest's directory.
struct Dataset {
  std::vector<QAItem> items;
  std::filesystem::path index_path;
  std::filesystem::path documents_path;
};

/// Throws DataError on schema violations, empty gold answers, duplicate ids or missing frame dirs.
Dataset load_dataset(const std::filesystem::path& manifest);
void save_manifest(const Dataset& dataset, const std::filesystem::path& manifest);

/// Normalizes provided embeddings and embeds (as text) any document that lacks one.
Index build_index_from_documents(std::vector<DocumentInput> docs, InferenceBackend* embedder, Metadata metadata = {});

/// Loads the dataset's binary index if it has one, otherwise builds from its documents file.
Index load_dataset_index(const Dataset& dataset, InferenceBackend* embedder);

}  // namespace vsrag
