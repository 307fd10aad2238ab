#include "vsrag/eval.hpp"

#include <iomanip>
#include <set>
#include <sstream>

#include "vsrag/errors.hpp"
#include "vsrag/fanout.hpp"

namespace vsrag {

RecordDigest digest(const RunRecord& r) {
  RecordDigest d;
  d.item_id = r.item_id;
  d.mode = std::string(to_string(r.mode));
  if (r.mode == Mode::speculate_rag) {
    d.strategy = r.config.value("strategy", "");
    d.delta = r.config.value("delta", 0.0);
  }
  d.correct = r.correct;
  d.failed = r.error.has_value();
  d.simulated_total_ms = r.timing.simulated_total_ms;
  d.total_ms = r.timing.total_ms;
  d.tags = r.tags;
  return d;
}

RecordDigest digest_from_json(const nlohmann::json& j) {
  try {
    RecordDigest d;
    d.item_id = j.at("item_id").get<std::string>();
    d.mode = j.at("mode").get<std::string>();
    if (d.mode == "speculate_rag" && j.contains("config")) {
      d.strategy = j["config"].value("strategy", "");
      d.delta = j["config"].value("delta", 0.0);
    }
    d.correct = j.at("correct").get<bool>();
    d.failed = j.contains("error") && !j["error"].is_null();
    d.simulated_total_ms = j.at("timing").at("simulated_total_ms").get<double>();
    d.total_ms = j.at("timing").at("total_ms").get<double>();
    if (j.contains("tags")) d.tags = j["tags"].get<std::vector<std::string>>();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid run record: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const EvalSummary& s) {
  nlohmann::ordered_json j;
  j["label"] = s.label;
  j["mode"] = s.mode;
  j["strategy"] = s.strategy.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(s.strategy);
  j["delta"] = s.strategy.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(s.delta);
  j["item_count"] = s.item_count;
  j["correct_count"] = s.correct_count;
  j["error_count"] = s.error_count;
  j["accuracy"] = s.accuracy;
  j["mean_latency_ms"] = s.mean_latency_ms;
  j["mean_total_ms"] = s.mean_total_ms;
  j["per_tag"] = nlohmann::ordered_json::object();
  for (const auto& [tag, t] : s.per_tag) {
    j["per_tag"][tag] = {{"correct", t.correct}, {"count", t.count}, {"accuracy", t.accuracy()}};
  }
  return j;
}

std::vector<EvalSummary> summarize(std::span<const RecordDigest> records) {
  std::vector<EvalSummary> out;
  std::map<std::string, std::size_t> slot;
  for (const auto& r : records) {
    std::ostringstream label;
    label << r.mode;
    if (!r.strategy.empty()) label << "/" << r.strategy << "/delta=" << r.delta;
    auto [it, inserted] = slot.emplace(label.str(), out.size());
    if (inserted) {
      EvalSummary s;
      s.label = label.str();
      s.mode = r.mode;
      s.strategy = r.strategy;
      s.delta = r.delta;
      out.push_back(std::move(s));
    }
    EvalSummary& s = out[it->second];
    ++s.item_count;
    s.correct_count += r.correct ? 1 : 0;
    s.error_count += r.failed ? 1 : 0;
    s.mean_latency_ms += r.simulated_total_ms;
    s.mean_total_ms += r.total_ms;
    for (const auto& tag : r.tags) {
      auto& t = s.per_tag[tag];
      ++t.count;
      t.correct += r.correct ? 1 : 0;
    }
  }
  for (auto& s : out) {
    const auto n = static_cast<double>(s.item_count);
    s.accuracy = 100.0 * static_cast<double>(s.correct_count) / n;
    s.mean_latency_ms /= n;
    s.mean_total_ms /= n;
  }
  return out;
}

std::string format_table(std::span<const EvalSummary> summaries) {
  std::set<std::string> tags;
  for (const auto& s : summaries) {
    for (const auto& [tag, _] : s.per_tag) tags.insert(tag);
  }
  std::size_t width = 6;
  for (const auto& s : summaries) width = std::max(width, s.label.size());

  std::ostringstream header;
  header << std::left << std::setw(static_cast<int>(width)) << "Method" << std::right << std::setw(8) << "Items"
         << std::setw(11) << "Accuracy" << std::setw(15) << "Latency (ms)" << std::setw(8) << "Errors";
  for (const auto& tag : tags) header << "  " << tag;
  const std::string head = header.str();

  std::ostringstream out;
  out << head << '\n' << std::string(head.size(), '-') << '\n';
  out << std::fixed;
  for (const auto& s : summaries) {
    out << std::left << std::setw(static_cast<int>(width)) << s.label << std::right << std::setw(8) << s.item_count
        << std::setw(11) << std::setprecision(2) << s.accuracy << std::setw(15) << std::setprecision(1)
        << s.mean_latency_ms << std::setw(8) << s.error_count;
    for (const auto& tag : tags) {
      const auto it = s.per_tag.find(tag);
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(2);
      if (it == s.per_tag.end()) {
        cell << "-";
      } else {
        cell << it->second.accuracy();
      }
      out << "  " << std::setw(static_cast<int>(tag.size())) << cell.str();
    }
    out << '\n';
  }
  return out.str();
}

EvalRun run_eval(const Dataset& dataset, const PipelineConfig& config, const Backends& backends,
                 std::shared_ptr<const Index> index, const RecordSink& sink) {
  if (dataset.items.empty()) throw DataError("dataset has no items");
  const Pipeline pipeline(config, backends, std::move(index));
  EvalRun run;
  run.records.resize(dataset.items.size());
  bounded_parallel_for(dataset.items.size(), config.max_parallel_items,
                       [&](std::size_t i) { run.records[i] = pipeline.run(dataset.items[i]); });
  std::vector<RecordDigest> digests;
  digests.reserve(run.records.size());
  for (const auto& r : run.records) {
    if (sink) sink(r);
    digests.push_back(digest(r));
  }
  run.summary = summarize(digests).front();
  return run;
}

std::string sweep_key(const std::string& param) {
  if (param == "delta") return "verify.delta";
  if (param == "strategy") return "verify.strategy";
  if (param == "mode") return "pipeline.mode";
  if (param == "theta") return "keyframe.theta";
  if (param == "k") return "retrieval.k";
  return param;
}

std::vector<SweepCell> run_sweep(const Dataset& dataset, const PipelineConfig& base, const Backends& backends,
                                 std::shared_ptr<const Index> index, const std::string& param,
                                 std::span<const std::string> values, const RecordSink& sink) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  const std::string key = sweep_key(param);
  std::vector<SweepCell> cells;
  for (const auto& v : values) {
    PipelineConfig config = base;
    apply_setting(config, key, v);
    config.validate();
    cells.push_back(SweepCell{param, v, run_eval(dataset, config, backends, index, sink).summary});
  }
  return cells;
}

}  // namespace vsrag
