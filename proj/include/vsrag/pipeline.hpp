#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vsrag/backend.hpp"
#include "vsrag/config.hpp"
#include "vsrag/dataset.hpp"
#include "vsrag/draft.hpp"
#include "vsrag/verifier.hpp"

namespace vsrag {

/// Per-stage times in the run's clock (see ClockMode) plus the simulated end-to-end time.
/// total_ms = keyframe + retrieval + draft + verify + generate.
struct StageTiming {
  double keyframe_ms = 0.0;
  double retrieval_ms = 0.0;
  double draft_ms = 0.0;
  double verify_ms = 0.0;
  double generate_ms = 0.0;  ///< single-pass answer in the no_rag / standard_rag baselines
  double total_ms = 0.0;
  double simulated_total_ms = 0.0;
};

struct RetrievedDoc {
  std::string doc_id;
  double score = 0.0;
  std::size_t best_keyframe_index = 0;
};

/// Full trace of one question.
struct RunRecord {
  std::string item_id;
  Mode mode = Mode::speculate_rag;
  std::vector<std::string> tags;
  std::string question;
  std::vector<std::string> gold_answers;
  std::size_t source_frame_count = 0;
  std::size_t keyframe_count = 0;
  std::vector<RetrievedDoc> retrieved;
  std::vector<DraftCandidate> candidates;
  std::vector<DraftFailure> draft_failures;
  std::optional<Selection> selection;
  std::string final_answer;
  bool correct = false;
  std::optional<std::string> error;
  StageTiming timing;
  nlohmann::ordered_json config;
};

nlohmann::ordered_json to_json(const RunRecord& record);

/// Everything needed to re-run an item identically against the mock backend.
nlohmann::ordered_json config_snapshot(const PipelineConfig& config);

/// Seed used for the random strategy on one item.
std::uint64_t item_selection_seed(std::uint64_t base_seed, const std::string& item_id) noexcept;

/// Thrown by the answer_* entry points when an item cannot be answered.
class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Pipeline {
 public:
  /// `index` may be null for no_rag runs.
  Pipeline(PipelineConfig config, Backends backends, std::shared_ptr<const Index> index);

  /// Answers with the configured mode. Errors are caught and recorded on the RunRecord.
  RunRecord run(const QAItem& item) const;
  RunRecord run(const QAItem& item, std::span<const Frame> video) const;

  // These throw on failure (PipelineError, NoDraftsError, BackendFailure, DataError).
  RunRecord answer_no_rag(const QAItem& item, std::span<const Frame> video) const;
  RunRecord answer_standard_rag(const QAItem& item, std::span<const Frame> video) const;
  RunRecord answer_speculate_rag(const QAItem& item, std::span<const Frame> video) const;

  const PipelineConfig& config() const noexcept { return config_; }

 private:
  struct Prepared;
  Prepared prepare(const QAItem& item, std::span<const Frame> video, Mode mode, bool retrieve) const;
  bool judge(const std::string& predicted, const QAItem& item) const;
  void finish(RunRecord& record, const QAItem& item) const;

  PipelineConfig config_;
  Backends backends_;
  std::shared_ptr<const Index> index_;
};

}  // namespace vsrag
