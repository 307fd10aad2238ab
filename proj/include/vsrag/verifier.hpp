#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vsrag/backend.hpp"
#include "vsrag/draft.hpp"
#include "vsrag/prompts.hpp"
#include "vsrag/retrieval.hpp"

namespace vsrag {

/// p_yes / p_no read from a first-token distribution, and the reliability they imply.
struct ReliabilityReading {
  double p_yes = 0.0;
  double p_no = 0.0;
  double reliability = 0.5;
  bool unscored = false;  ///< neither token present; reliability fell back to 0.5
  double wall_time_ms = 0.0;
};

/// Sums every token equal to "yes" / "no" after stripping leading whitespace, case-insensitively.
ReliabilityReading read_reliability(std::span<const TokenProbability> distribution);

/// One verifier call (max_new_tokens = 1) over (Q, V, a, e, r), or over (Q, V, a) when
/// `self_consistent` is set. Backend failures propagate.
ReliabilityReading reliability_score(const std::string& question, std::span<const ImagePayload> keyframe_images,
                                     const DraftCandidate& candidate, const PromptTemplateSet& templates,
                                     InferenceBackend& verifier, bool self_consistent = false);

/// Indices of candidates with reliability >= max - delta. Never empty for non-empty input.
/// Throws ConfigError on empty input or negative delta.
std::vector<std::size_t> high_reliability_set(std::span<const double> reliabilities, double delta);

/// Max cosine similarity between an entity embedding and any keyframe embedding.
double alignment_score(const EmbeddingVector& entity, std::span<const EmbeddingVector> keyframe_embeddings);

/// Embeds the candidate's entity string, then scores it against cached keyframe embeddings.
struct AlignmentReading {
  double alignment = 0.0;
  double wall_time_ms = 0.0;
};
AlignmentReading alignment_score(const DraftCandidate& candidate, std::span<const EmbeddingVector> keyframe_embeddings,
                                 InferenceBackend& embedder);

enum class StrategyKind { two_stage, reliability_only, alignment_only, addition, invert, self_consistent, random };

std::string_view to_string(StrategyKind kind) noexcept;
StrategyKind parse_strategy(std::string_view text);
inline constexpr StrategyKind kAllStrategies[] = {
    StrategyKind::two_stage, StrategyKind::reliability_only, StrategyKind::alignment_only, StrategyKind::addition,
    StrategyKind::invert,    StrategyKind::self_consistent,  StrategyKind::random};

struct SelectionStrategy {
  StrategyKind kind = StrategyKind::two_stage;
  double delta = 0.05;
  std::uint64_t rng_seed = 0;
};

bool uses_reliability(StrategyKind kind) noexcept;
bool uses_alignment(StrategyKind kind) noexcept;

struct VerificationScores {
  double p_yes = 0.0;
  double p_no = 0.0;
  double reliability = 0.0;
  double alignment = 0.0;
  bool reliability_scored = false;
  bool alignment_scored = false;
  bool unscored = false;
  bool in_high_set = false;
  std::optional<double> combined;
};

struct ScoredCandidate {
  std::string doc_id;
  std::size_t ordinal = 0;
  VerificationScores scores;
};

struct CandidateAudit {
  std::string doc_id;
  std::size_t ordinal = 0;
  VerificationScores scores;
  std::vector<std::string> flags;
};

struct Selection {
  std::size_t selected = 0;  ///< position in the input span
  std::string doc_id;
  SelectionStrategy strategy;
  std::vector<CandidateAudit> audit;
};

/// Applies `strategy` to scored candidates. Argmax ties go to the lowest ordinal.
/// Throws ConfigError on empty input.
Selection select_final(std::span<const ScoredCandidate> candidates, const SelectionStrategy& strategy);

struct VerifyOptions {
  std::size_t max_parallel = 3;
};

struct VerificationOutcome {
  std::vector<ScoredCandidate> scored;
  Selection selection;
  double reliability_ms = 0.0;  ///< virtual makespan of the verifier calls
  double alignment_ms = 0.0;    ///< sum of entity embedding calls
  double total_ms() const noexcept { return reliability_ms + alignment_ms; }
};

/// Scores every candidate as the strategy requires, then selects.
VerificationOutcome verify_candidates(const std::string& question, std::span<const ImagePayload> keyframe_images,
                                      std::span<const DraftCandidate> candidates,
                                      std::span<const EmbeddingVector> keyframe_embeddings,
                                      const PromptTemplateSet& templates, InferenceBackend& verifier,
                                      InferenceBackend& embedder, const SelectionStrategy& strategy,
                                      const VerifyOptions& options = {});

}  // namespace vsrag
