#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vsrag/keyframe.hpp"
#include "vsrag/protocol.hpp"

namespace vsrag {

/// Versioned prompt templates. Placeholders use `{name}` syntax.
///
///   entity          {document}
///   rationale       {question} {entity} {document}
///   answer          {question} {entity} {rationale}
///   verify          {question} {answer} {entity} {rationale}
///   self_consistent {question} {answer}
///   standard_rag    {question} {documents}
///   no_rag          {question}
///
/// The version is "<label>-<hash of all template texts>", so it changes whenever any text does.
struct PromptTemplateSet {
  std::string entity;
  std::string rationale;
  std::string answer;
  std::string verify;
  std::string self_consistent;
  std::string standard_rag;
  std::string no_rag;
  std::string label = "v1";

  static PromptTemplateSet defaults();

  /// Template file: `[name]` section headers followed by the template text. A `[label]`
  /// section sets the version label. Missing sections keep their defaults.
  static PromptTemplateSet parse(std::string_view text);
  static PromptTemplateSet load(const std::filesystem::path& path);

  std::string version() const;

  /// Throws ConfigError unless every template has exactly its required placeholders.
  void validate() const;
};

std::set<std::string> placeholders(std::string_view tmpl);
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// PPM-encoded, base64 frame payload.
ImagePayload frame_payload(const Frame& frame);

/// At most `max_frames` keyframes, uniformly strided, as payloads.
std::vector<ImagePayload> keyframe_payloads(const KeyframeSet& keyframes, std::size_t max_frames);

/// Per-call generation limits.
struct TokenLimits {
  int entity = 16;
  int rationale = 64;
  int answer = 32;
  int baseline_answer = 32;
};

ChatRequest entity_request(std::span<const ImagePayload> images, const std::string& document,
                           const PromptTemplateSet& templates, const TokenLimits& limits);
ChatRequest rationale_request(std::span<const ImagePayload> images, const std::string& question,
                              const std::string& entity, const std::string& document,
                              const PromptTemplateSet& templates, const TokenLimits& limits);
ChatRequest answer_request(std::span<const ImagePayload> images, const std::string& question,
                           const std::string& entity, const std::string& rationale,
                           const PromptTemplateSet& templates, const TokenLimits& limits);

/// Single-token Yes/No verification over (Q, V, a, e, r).
ChatRequest verify_request(std::span<const ImagePayload> images, const std::string& question,
                           const std::string& answer, const std::string& entity, const std::string& rationale,
                           const PromptTemplateSet& templates);
/// Verification without entity or rationale context.
ChatRequest self_consistent_request(std::span<const ImagePayload> images, const std::string& question,
                                    const std::string& answer, const PromptTemplateSet& templates);

/// Documents are joined in retrieval order, each on its own numbered line.
ChatRequest standard_rag_request(std::span<const ImagePayload> images, const std::string& question,
                                 std::span<const std::string> documents, const PromptTemplateSet& templates,
                                 const TokenLimits& limits, ModelTag tag = ModelTag::verifier);
ChatRequest no_rag_request(std::span<const ImagePayload> images, const std::string& question,
                           const PromptTemplateSet& templates, const TokenLimits& limits, ModelTag tag);

}  // namespace vsrag
