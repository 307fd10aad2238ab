#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "vsrag/backend.hpp"
#include "vsrag/errors.hpp"
#include "vsrag/prompts.hpp"
#include "vsrag/retrieval.hpp"

namespace vsrag {

/// One drafter chain's output for one retrieved document.
struct DraftCandidate {
  std::string doc_id;
  std::string entity;
  std::string rationale;
  std::string answer;
  std::array<double, 3> step_ms{};  ///< entity, rationale, answer (backend-reported)
  std::size_t ordinal = 0;          ///< retrieval rank of the source document

  double chain_ms() const noexcept { return step_ms[0] + step_ms[1] + step_ms[2]; }
};

enum class DraftStep { entity, rationale, answer };
std::string_view to_string(DraftStep step) noexcept;

/// A chain that failed at `step`. Sibling chains are unaffected.
class DraftStepError : public std::runtime_error {
 public:
  DraftStepError(DraftStep step, const std::string& message);
  DraftStep step() const noexcept { return step_; }

 private:
  DraftStep step_;
};

/// Raised by draft_all when every chain failed.
class NoDraftsError : public std::runtime_error {
 public:
  NoDraftsError() : std::runtime_error("no drafts") {}
};

struct DraftFailure {
  std::string doc_id;
  std::size_t ordinal = 0;
  DraftStep step = DraftStep::entity;
  std::string message;
};

struct DraftOptions {
  std::size_t max_parallel = 3;
  std::size_t max_keyframes_per_call = 8;
  TokenLimits limits;
};

struct DraftBatch {
  std::vector<DraftCandidate> candidates;  ///< ordered by ordinal
  std::vector<DraftFailure> failures;      ///< ordered by ordinal
  double critical_path_ms = 0.0;           ///< virtual makespan across chains
};

/// Three sequential drafter calls: entity from (V, doc); rationale from (V, Q, entity, doc);
/// answer from (V, Q, entity, rationale). Throws DraftStepError.
DraftCandidate draft_one(std::span<const ImagePayload> keyframe_images, const std::string& question,
                         const Document& doc, std::size_t ordinal, const PromptTemplateSet& templates,
                         InferenceBackend& drafter, const TokenLimits& limits = {});

DraftCandidate draft_one(const KeyframeSet& keyframes, const std::string& question, const Document& doc,
                         std::size_t ordinal, const PromptTemplateSet& templates, InferenceBackend& drafter,
                         const DraftOptions& options = {});

/// Fans draft_one out over `docs` with at most options.max_parallel chains in flight.
/// Throws NoDraftsError if every chain fails, ConfigError on max_parallel == 0 or empty docs.
DraftBatch draft_all(std::span<const ImagePayload> keyframe_images, const std::string& question,
                     std::span<const RetrievalResult> docs, const PromptTemplateSet& templates,
                     InferenceBackend& drafter, const DraftOptions& options = {});

DraftBatch draft_all(const KeyframeSet& keyframes, const std::string& question, std::span<const RetrievalResult> docs,
                     const PromptTemplateSet& templates, InferenceBackend& drafter, const DraftOptions& options = {});

}  // namespace vsrag
