#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "vsrag/draft.hpp"
#include "vsrag/keyframe.hpp"
#include "vsrag/prompts.hpp"
#include "vsrag/retrieval.hpp"
#include "vsrag/verifier.hpp"

namespace vsrag {

/// Flat view of a hierarchical key=value file. Keys are dotted paths; a `[section]` line
/// prefixes the keys that follow it. `#` and `;` start comments at line start or after whitespace.
class ConfigMap {
 public:
  static ConfigMap parse(std::string_view text);
  static ConfigMap load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  bool contains(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

enum class Mode { no_rag, standard_rag, speculate_rag };
std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view text);

enum class ClockMode {
  virtual_time,  ///< stage timings come from backend-reported (simulated) wall times
  real_time,     ///< stage timings are measured with a steady clock
};

enum class JudgeMode { rule, model };

struct Endpoints {
  std::string drafter;
  std::string verifier;
  std::string embed;
};

struct PipelineConfig {
  Mode mode = Mode::speculate_rag;
  KeyframeOptions keyframe;
  RetrievalOptions retrieval;
  DraftOptions draft;
  VerifyOptions verify;
  SelectionStrategy strategy;
  ModelTag no_rag_model = ModelTag::verifier;
  PromptTemplateSet templates = PromptTemplateSet::defaults();
  std::string template_path;
  std::uint64_t seed = 0;
  ClockMode clock = ClockMode::virtual_time;
  JudgeMode judge = JudgeMode::rule;
  std::size_t max_parallel_items = 1;
  Endpoints endpoints;

  void validate() const;
};

/// Builds a PipelineConfig from a ConfigMap. Relative paths resolve against `base_dir`.
/// `VSRAG_ENDPOINT_<DRAFTER|VERIFIER|EMBED>` environment variables override endpoints.
PipelineConfig pipeline_config_from(const ConfigMap& map, const std::filesystem::path& base_dir = {});

/// Applies one `key = value` override using the same key names as the config file.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir = {});

/// Serializes the config back to key=value text (endpoints included).
std::string to_config_text(const PipelineConfig& config);

}  // namespace vsrag
