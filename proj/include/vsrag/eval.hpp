#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vsrag/pipeline.hpp"

namespace vsrag {

/// The fields of a RunRecord that summaries need; buildable from a record or its JSON line.
struct RecordDigest {
  std::string item_id;
  std::string mode;
  std::string strategy;
  double delta = 0.0;
  bool correct = false;
  bool failed = false;
  double simulated_total_ms = 0.0;
  double total_ms = 0.0;
  std::vector<std::string> tags;
};

RecordDigest digest(const RunRecord& record);
RecordDigest digest_from_json(const nlohmann::json& line);

struct TagAccuracy {
  std::size_t correct = 0;
  std::size_t count = 0;
  double accuracy() const noexcept { return count == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(count); }
};

struct EvalSummary {
  std::string label;
  std::string mode;
  std::string strategy;  ///< empty for the baselines
  double delta = 0.0;
  std::size_t item_count = 0;
  std::size_t correct_count = 0;
  std::size_t error_count = 0;
  double accuracy = 0.0;         ///< percent
  double mean_latency_ms = 0.0;  ///< simulated
  double mean_total_ms = 0.0;    ///< in the run's clock
  std::map<std::string, TagAccuracy> per_tag;
};

nlohmann::ordered_json to_json(const EvalSummary& summary);

/// Groups by (mode, strategy, delta) in first-appearance order.
std::vector<EvalSummary> summarize(std::span<const RecordDigest> records);

/// Table with fixed columns: Method, Items, Accuracy, Latency (ms), Errors, then per-tag accuracy.
std::string format_table(std::span<const EvalSummary> summaries);

struct EvalRun {
  EvalSummary summary;
  std::vector<RunRecord> records;  ///< dataset order
};

using RecordSink = std::function<void(const RunRecord&)>;

/// Evaluates every item (up to config.max_parallel_items concurrently). Records reach `sink`
/// in dataset order. Per-item errors are recorded and counted as incorrect.
EvalRun run_eval(const Dataset& dataset, const PipelineConfig& config, const Backends& backends,
                 std::shared_ptr<const Index> index, const RecordSink& sink = {});

struct SweepCell {
  std::string param;
  std::string value;
  EvalSummary summary;
};

/// One run_eval per value of `param` (any config key, e.g. "verify.delta", or the shorthands
/// "delta", "strategy", "mode", "theta", "k"). Every cell evaluates the same items.
std::vector<SweepCell> run_sweep(const Dataset& dataset, const PipelineConfig& base, const Backends& backends,
                                 std::shared_ptr<const Index> index, const std::string& param,
                                 std::span<const std::string> values, const RecordSink& sink = {});

/// Maps sweep shorthands to config keys.
std::string sweep_key(const std::string& param);

}  // namespace vsrag
