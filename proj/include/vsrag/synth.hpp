#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "vsrag/config.hpp"
#include "vsrag/protocol.hpp"

namespace vsrag {

inline constexpr const char* kTagTransfer = "cross_entity_transfer";
inline constexpr const char* kTagSubstitution = "entity_substitution";
inline constexpr const char* kTagClean = "clean";

struct SynthOptions {
  std::uint64_t seed = 7;
  std::size_t size = 50;
  double transfer_fraction = 0.4;
  double substitution_fraction = 0.4;
  std::size_t doc_tokens = 200;  ///< words per document
  std::size_t dim = 64;
  std::size_t frames_per_item = 6;
  LatencyModel drafter_latency{0.1, 3.0, 20.0};
  LatencyModel verifier_latency{1.0, 30.0, 200.0};
  LatencyModel embed_latency{0.0, 0.0, 5.0};
};

struct SynthReport {
  std::filesystem::path manifest;
  std::filesystem::path config;
  std::filesystem::path fixtures;
  std::size_t item_count = 0;
  std::size_t document_count = 0;
  std::map<std::string, std::size_t> tag_counts;
};

/// Writes a self-contained misleading-document corpus into `out_dir`:
///   manifest.json, docs.jsonl, index.bin, fixtures.json, frames/<item>/NNN.ppm, run.cfg
///
/// Every item has a correct document, a distractor about a confusable entity and an unrelated
/// background document. Distractor drafts follow one of three patterns (tagged per item):
///   cross_entity_transfer  right entity, contaminated rationale, reliability 0.06-0.18 below the correct draft
///   entity_substitution    wrong entity with an orthogonal embedding, reliability 0.005-0.04 above the correct draft
///   clean                  low reliability and low alignment
/// Fixture keys are derived with `config` (keyframe, retrieval, templates and token limits), which is
/// also written to run.cfg with mock endpoints. Throws ConfigError on invalid options.
SynthReport generate_synthetic_corpus(const SynthOptions& options, const std::filesystem::path& out_dir,
                                      const PipelineConfig& config = {});

}  // namespace vsrag
