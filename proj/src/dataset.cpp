#include "vsrag/dataset.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "vsrag/errors.hpp"
#include "vsrag/index_io.hpp"

namespace vsrag {

namespace fs = std::filesystem;

Dataset load_dataset(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DataError("cannot open manifest " + manifest.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("items") || !j["items"].is_array()) {
    throw DataError("manifest must be an object with an 'items' array");
  }
  const fs::path base = manifest.parent_path();
  Dataset d;
  if (j.contains("index")) d.index_path = base / j["index"].get<std::string>();
  if (j.contains("documents")) d.documents_path = base / j["documents"].get<std::string>();

  std::unordered_set<std::string> seen;
  for (const auto& it : j["items"]) {
    try {
      QAItem item;
      item.item_id = it.at("item_id").get<std::string>();
      item.frame_dir = base / it.at("frame_dir").get<std::string>();
      item.question = it.at("question").get<std::string>();
      item.gold_answers = it.at("gold_answers").get<std::vector<std::string>>();
      if (it.contains("tags")) item.tags = it["tags"].get<std::vector<std::string>>();
      if (item.gold_answers.empty()) throw DataError("item '" + item.item_id + "' has no gold answers");
      if (item.question.empty()) throw DataError("item '" + item.item_id + "' has an empty question");
      if (!fs::is_directory(item.frame_dir)) {
        throw DataError("item '" + item.item_id + "': frame_dir not found: " + item.frame_dir.string());
      }
      if (!seen.insert(item.item_id).second) throw DataError("duplicate item_id '" + item.item_id + "'");
      d.items.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("invalid manifest item: ") + e.what());
    }
  }
  return d;
}

void save_manifest(const Dataset& dataset, const fs::path& manifest) {
  const fs::path base = manifest.parent_path();
  const auto rel = [&](const fs::path& p) { return p.lexically_relative(base).generic_string(); };
  nlohmann::ordered_json j;
  if (!dataset.index_path.empty()) j["index"] = rel(dataset.index_path);
  if (!dataset.documents_path.empty()) j["documents"] = rel(dataset.documents_path);
  j["items"] = nlohmann::ordered_json::array();
  for (const auto& item : dataset.items) {
    nlohmann::ordered_json e;
    e["item_id"] = item.item_id;
    e["frame_dir"] = rel(item.frame_dir);
    e["question"] = item.question;
    e["gold_answers"] = item.gold_answers;
    e["tags"] = item.tags;
    j["items"].push_back(std::move(e));
  }
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw DataError("cannot write " + manifest.string());
  out << j.dump(1) << '\n';
}

Index build_index_from_documents(std::vector<DocumentInput> docs, InferenceBackend* embedder, Metadata metadata) {
  for (auto& d : docs) {
    if (!d.raw_embedding.empty()) continue;
    if (embedder == nullptr) throw DataError("document '" + d.doc_id + "' has no embedding and no embed endpoint was given");
    if (d.text.empty()) throw DataError("document '" + d.doc_id + "' has empty text");
    d.raw_embedding = embedder->embed(EmbedRequest::for_text(d.text)).embedding;
  }
  return Index::build(std::move(docs), std::move(metadata));
}

Index load_dataset_index(const Dataset& dataset, InferenceBackend* embedder) {
  if (!dataset.index_path.empty()) return load_index(dataset.index_path);
  if (!dataset.documents_path.empty()) {
    return build_index_from_documents(read_documents_jsonl(dataset.documents_path), embedder);
  }
  throw DataError("dataset names neither an index nor a documents file");
}

}  // namespace vsrag
