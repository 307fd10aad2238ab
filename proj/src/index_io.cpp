#include "vsrag/index_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>

#include "vsrag/errors.hpp"

namespace vsrag {

namespace {

constexpr std::array<char, 8> kMagic = {'V', 'S', 'R', 'A', 'G', 'I', 'D', 'X'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T v) {
  std::array<char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF);
  out.write(buf.data(), buf.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> buf{};
  if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size())) throw DataError("truncated index file");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return static_cast<T>(v);
}

void put_string(std::ostream& out, const std::string& s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get_le<std::uint32_t>(in);
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) throw DataError("truncated index file");
  return s;
}

std::string metadata_json(const Metadata& m) { return nlohmann::json(m).dump(); }

Metadata parse_metadata(const std::string& text) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DataError("invalid metadata block in index file");
  Metadata m;
  for (const auto& [k, v] : j.items()) m[k] = v.is_string() ? v.get<std::string>() : v.dump();
  return m;
}

}  // namespace

void write_index_binary(const Index& index, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.dim()));
  put_le<std::uint64_t>(out, index.size());
  put_string(out, metadata_json(index.metadata()));
  for (const auto& d : index.documents()) {
    put_string(out, d.doc_id);
    put_string(out, d.text);
    put_string(out, metadata_json(d.metadata));
    for (float f : d.embedding.values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  }
  if (!out) throw DataError("failed writing index");
}

Index read_index_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw DataError("not a vsrag index file");
  if (const auto v = get_le<std::uint32_t>(in); v != kVersion) {
    throw DataError("unsupported index version " + std::to_string(v));
  }
  const auto dim = get_le<std::uint32_t>(in);
  const auto count = get_le<std::uint64_t>(in);
  Metadata index_meta = parse_metadata(get_string(in));
  std::vector<Document> docs;
  for (std::uint64_t i = 0; i < count; ++i) {
    Document d;
    d.doc_id = get_string(in);
    d.text = get_string(in);
    d.metadata = parse_metadata(get_string(in));
    d.embedding.values.resize(dim);
    for (auto& f : d.embedding.values) f = std::bit_cast<float>(get_le<std::uint32_t>(in));
    docs.push_back(std::move(d));
  }
  return Index::from_documents(std::move(docs), std::move(index_meta));
}

void save_index(const Index& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  write_index_binary(index, out);
}

Index load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_index_binary(in);
}

std::vector<DocumentInput> parse_documents_jsonl(std::istream& in) {
  std::vector<DocumentInput> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("doc_id") || !j.contains("text")) {
      throw DataError("documents line " + std::to_string(line_no) + ": expected {doc_id, text, ...}");
    }
    DocumentInput d;
    d.doc_id = j["doc_id"].get<std::string>();
    d.text = j["text"].get<std::string>();
    if (j.contains("embedding")) d.raw_embedding = j["embedding"].get<std::vector<double>>();
    if (j.contains("metadata")) {
      for (const auto& [k, v] : j["metadata"].items()) d.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<DocumentInput> read_documents_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_documents_jsonl(in);
}

void write_documents_jsonl(const Index& index, std::ostream& out) {
  for (const auto& d : index.documents()) {
    nlohmann::ordered_json j;
    j["doc_id"] = d.doc_id;
    j["text"] = d.text;
    j["embedding"] = d.embedding.values;
    if (!d.metadata.empty()) j["metadata"] = d.metadata;
    out << j.dump() << '\n';
  }
}

void export_index_jsonl(const Index& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  write_documents_jsonl(index, out);
}

}  // namespace vsrag
