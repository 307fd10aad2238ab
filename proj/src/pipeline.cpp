#include "vsrag/pipeline.hpp"

#include <chrono>

#include "vsrag/hash.hpp"
#include "vsrag/image_io.hpp"
#include "vsrag/judge.hpp"

namespace vsrag {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Picks the stage value for the configured clock.
struct StageMeter {
  ClockMode mode;
  double pick(double simulated, double real) const { return mode == ClockMode::virtual_time ? simulated : real; }
};

nlohmann::ordered_json scores_json(const VerificationScores& s) {
  nlohmann::ordered_json j;
  j["p_yes"] = s.reliability_scored ? nlohmann::ordered_json(s.p_yes) : nlohmann::ordered_json();
  j["p_no"] = s.reliability_scored ? nlohmann::ordered_json(s.p_no) : nlohmann::ordered_json();
  j["reliability"] = s.reliability_scored ? nlohmann::ordered_json(s.reliability) : nlohmann::ordered_json();
  j["alignment"] = s.alignment_scored ? nlohmann::ordered_json(s.alignment) : nlohmann::ordered_json();
  j["in_high_set"] = s.in_high_set;
  j["combined"] = s.combined ? nlohmann::ordered_json(*s.combined) : nlohmann::ordered_json();
  return j;
}

}  // namespace

struct Pipeline::Prepared {
  KeyframeSet keyframes;
  std::vector<ImagePayload> images;
  std::vector<EmbeddingVector> keyframe_embeddings;
  std::vector<RetrievalResult> retrieved;
  double keyframe_real_ms = 0.0;
  double retrieval_real_ms = 0.0;
  double retrieval_sim_ms = 0.0;
};

std::uint64_t item_selection_seed(std::uint64_t base_seed, const std::string& item_id) noexcept {
  std::uint64_t state = base_seed ^ fnv1a(item_id);
  return splitmix64(state);
}

nlohmann::ordered_json config_snapshot(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(c.mode);
  j["theta"] = c.keyframe.theta;
  j["bins_per_channel"] = c.keyframe.bins_per_channel;
  j["keyframe_compare_to"] =
      c.keyframe.compare_to == KeyframeReference::previous_frame ? "previous_frame" : "previous_keyframe";
  j["k"] = c.retrieval.k;
  j["retrieval_aggregation"] =
      c.retrieval.aggregation == RetrievalAggregation::max_over_keyframes ? "max_over_keyframes" : "per_keyframe_union";
  j["per_keyframe_k"] = c.retrieval.per_keyframe_k;
  j["strategy"] = to_string(c.strategy.kind);
  j["delta"] = c.strategy.delta;
  j["strategy_seed"] = c.strategy.rng_seed;
  j["draft_max_parallel"] = c.draft.max_parallel;
  j["verify_max_parallel"] = c.verify.max_parallel;
  j["max_keyframes_per_call"] = c.draft.max_keyframes_per_call;
  j["token_limits"] = {{"entity", c.draft.limits.entity},
                       {"rationale", c.draft.limits.rationale},
                       {"answer", c.draft.limits.answer},
                       {"baseline_answer", c.draft.limits.baseline_answer}};
  j["no_rag_model"] = to_string(c.no_rag_model);
  j["template_version"] = c.templates.version();
  j["seed"] = c.seed;
  j["clock"] = c.clock == ClockMode::virtual_time ? "virtual" : "real";
  j["judge"] = c.judge == JudgeMode::rule ? "rule" : "model";
  return j;
}

nlohmann::ordered_json to_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["item_id"] = r.item_id;
  j["mode"] = to_string(r.mode);
  j["tags"] = r.tags;
  j["question"] = r.question;
  j["gold_answers"] = r.gold_answers;
  j["source_frame_count"] = r.source_frame_count;
  j["keyframe_count"] = r.keyframe_count;
  j["retrieved"] = nlohmann::ordered_json::array();
  for (const auto& d : r.retrieved) {
    j["retrieved"].push_back({{"doc_id", d.doc_id}, {"score", d.score}, {"best_keyframe_index", d.best_keyframe_index}});
  }
  j["candidates"] = nlohmann::ordered_json::array();
  for (const auto& c : r.candidates) {
    nlohmann::ordered_json e;
    e["doc_id"] = c.doc_id;
    e["ordinal"] = c.ordinal;
    e["entity"] = c.entity;
    e["rationale"] = c.rationale;
    e["answer"] = c.answer;
    e["step_ms"] = c.step_ms;
    j["candidates"].push_back(std::move(e));
  }
  j["draft_failures"] = nlohmann::ordered_json::array();
  for (const auto& f : r.draft_failures) {
    j["draft_failures"].push_back(
        {{"doc_id", f.doc_id}, {"ordinal", f.ordinal}, {"step", to_string(f.step)}, {"message", f.message}});
  }
  if (r.selection) {
    nlohmann::ordered_json v;
    v["strategy"] = to_string(r.selection->strategy.kind);
    v["delta"] = r.selection->strategy.delta;
    v["rng_seed"] = r.selection->strategy.rng_seed;
    v["selected_doc_id"] = r.selection->doc_id;
    v["candidates"] = nlohmann::ordered_json::array();
    for (const auto& a : r.selection->audit) {
      nlohmann::ordered_json e;
      e["doc_id"] = a.doc_id;
      e["ordinal"] = a.ordinal;
      const auto scores = scores_json(a.scores);
      for (const auto& [k, val] : scores.items()) e[k] = val;
      e["flags"] = a.flags;
      v["candidates"].push_back(std::move(e));
    }
    j["verification"] = std::move(v);
  } else {
    j["verification"] = nullptr;
  }
  j["final_answer"] = r.final_answer;
  j["correct"] = r.correct;
  j["error"] = r.error ? nlohmann::ordered_json(*r.error) : nlohmann::ordered_json();
  j["timing"] = {{"keyframe_ms", r.timing.keyframe_ms},   {"retrieval_ms", r.timing.retrieval_ms},
                 {"draft_ms", r.timing.draft_ms},         {"verify_ms", r.timing.verify_ms},
                 {"generate_ms", r.timing.generate_ms},   {"total_ms", r.timing.total_ms},
                 {"simulated_total_ms", r.timing.simulated_total_ms}};
  j["config"] = r.config;
  return j;
}

Pipeline::Pipeline(PipelineConfig config, Backends backends, std::shared_ptr<const Index> index)
    : config_(std::move(config)), backends_(std::move(backends)), index_(std::move(index)) {
  config_.validate();
  if (!backends_.drafter || !backends_.verifier || !backends_.embedder) {
    throw ConfigError("pipeline needs drafter, verifier and embed backends");
  }
}

Pipeline::Prepared Pipeline::prepare(const QAItem& item, std::span<const Frame> video, Mode mode, bool retrieve) const {
  if (item.question.empty()) throw PipelineError("item '" + item.item_id + "' has an empty question");
  Prepared p;
  auto t0 = Clock::now();
  p.keyframes = extract_keyframes(video, config_.keyframe);
  p.images = keyframe_payloads(p.keyframes, config_.draft.max_keyframes_per_call);
  p.keyframe_real_ms = elapsed_ms(t0);

  if (!retrieve) return p;
  if (!index_ || index_->empty()) {
    throw PipelineError(std::string(to_string(mode)) + " needs a non-empty document index");
  }
  t0 = Clock::now();
  p.keyframe_embeddings.reserve(p.keyframes.size());
  for (const auto& f : p.keyframes.frames) {
    const auto r = backends_.embedder->embed(EmbedRequest::for_image(frame_payload(f)));
    p.retrieval_sim_ms += r.wall_time_ms;
    p.keyframe_embeddings.push_back(normalize_embedding(std::span<const double>(r.embedding)));
  }
  p.retrieved = retrieve_top_k(*index_, p.keyframe_embeddings, config_.retrieval);
  p.retrieval_real_ms = elapsed_ms(t0);
  return p;
}

bool Pipeline::judge(const std::string& predicted, const QAItem& item) const {
  if (config_.judge == JudgeMode::rule) return judge_answer(predicted, item.gold_answers);
  std::string gold;
  for (const auto& g : item.gold_answers) gold += (gold.empty() ? "" : " | ") + g;
  ChatRequest r;
  r.model_tag = ModelTag::verifier;
  r.max_new_tokens = 1;
  r.want_first_token_distribution = true;
  r.messages.push_back(ChatMessage{Role::user, "Question: " + item.question + ". Prediction: " + predicted +
                                                   ". Gold answers: " + gold +
                                                   ". Is the prediction equivalent to a gold answer? Reply Yes or No."});
  const auto response = backends_.verifier->chat(r);
  if (!response.first_token_distribution) return false;
  const auto reading = read_reliability(*response.first_token_distribution);
  return !reading.unscored && reading.p_yes > reading.p_no;
}

void Pipeline::finish(RunRecord& record, const QAItem& item) const {
  auto& t = record.timing;
  t.total_ms = t.keyframe_ms + t.retrieval_ms + t.draft_ms + t.verify_ms + t.generate_ms;
  record.correct = judge(record.final_answer, item);
}

namespace {

RunRecord blank_record(const QAItem& item, Mode mode, const PipelineConfig& config) {
  RunRecord r;
  r.item_id = item.item_id;
  r.mode = mode;
  r.tags = item.tags;
  r.question = item.question;
  r.gold_answers = item.gold_answers;
  r.config = config_snapshot(config);
  r.config["mode"] = to_string(mode);
  return r;
}

void record_retrieval(RunRecord& r, const std::vector<RetrievalResult>& retrieved) {
  for (const auto& d : retrieved) r.retrieved.push_back(RetrievedDoc{d.doc.doc_id, d.score, d.best_keyframe_index});
}

}  // namespace

RunRecord Pipeline::answer_no_rag(const QAItem& item, std::span<const Frame> video) const {
  const StageMeter meter{config_.clock};
  RunRecord r = blank_record(item, Mode::no_rag, config_);
  const Prepared p = prepare(item, video, Mode::no_rag, false);
  r.source_frame_count = p.keyframes.source_frame_count;
  r.keyframe_count = p.keyframes.size();

  const auto t0 = Clock::now();
  const auto response = (config_.no_rag_model == ModelTag::verifier ? backends_.verifier : backends_.drafter)
                            ->chat(no_rag_request(p.images, item.question, config_.templates, config_.draft.limits,
                                                  config_.no_rag_model));
  r.final_answer = response.text;
  r.timing.keyframe_ms = meter.pick(0.0, p.keyframe_real_ms);
  r.timing.generate_ms = meter.pick(response.wall_time_ms, elapsed_ms(t0));
  r.timing.simulated_total_ms = response.wall_time_ms;
  finish(r, item);
  return r;
}

RunRecord Pipeline::answer_standard_rag(const QAItem& item, std::span<const Frame> video) const {
  const StageMeter meter{config_.clock};
  RunRecord r = blank_record(item, Mode::standard_rag, config_);
  const Prepared p = prepare(item, video, Mode::standard_rag, true);
  r.source_frame_count = p.keyframes.source_frame_count;
  r.keyframe_count = p.keyframes.size();
  record_retrieval(r, p.retrieved);

  std::vector<std::string> texts;
  for (const auto& d : p.retrieved) texts.push_back(d.doc.text);
  const auto t0 = Clock::now();
  const auto response = backends_.verifier->chat(
      standard_rag_request(p.images, item.question, texts, config_.templates, config_.draft.limits, ModelTag::verifier));
  r.final_answer = response.text;
  r.timing.keyframe_ms = meter.pick(0.0, p.keyframe_real_ms);
  r.timing.retrieval_ms = meter.pick(p.retrieval_sim_ms, p.retrieval_real_ms);
  r.timing.generate_ms = meter.pick(response.wall_time_ms, elapsed_ms(t0));
  r.timing.simulated_total_ms = p.retrieval_sim_ms + response.wall_time_ms;
  finish(r, item);
  return r;
}

RunRecord Pipeline::answer_speculate_rag(const QAItem& item, std::span<const Frame> video) const {
  const StageMeter meter{config_.clock};
  RunRecord r = blank_record(item, Mode::speculate_rag, config_);
  const Prepared p = prepare(item, video, Mode::speculate_rag, true);
  r.source_frame_count = p.keyframes.source_frame_count;
  r.keyframe_count = p.keyframes.size();
  record_retrieval(r, p.retrieved);

  auto t0 = Clock::now();
  DraftBatch batch = draft_all(p.images, item.question, p.retrieved, config_.templates, *backends_.drafter, config_.draft);
  const double draft_real = elapsed_ms(t0);
  r.draft_failures = batch.failures;

  SelectionStrategy strategy = config_.strategy;
  strategy.rng_seed = item_selection_seed(config_.strategy.rng_seed, item.item_id);
  t0 = Clock::now();
  const auto outcome = verify_candidates(item.question, p.images, batch.candidates, p.keyframe_embeddings,
                                         config_.templates, *backends_.verifier, *backends_.embedder, strategy,
                                         config_.verify);
  const double verify_real = elapsed_ms(t0);

  r.final_answer = batch.candidates[outcome.selection.selected].answer;
  r.candidates = std::move(batch.candidates);
  r.selection = outcome.selection;
  r.timing.keyframe_ms = meter.pick(0.0, p.keyframe_real_ms);
  r.timing.retrieval_ms = meter.pick(p.retrieval_sim_ms, p.retrieval_real_ms);
  r.timing.draft_ms = meter.pick(batch.critical_path_ms, draft_real);
  r.timing.verify_ms = meter.pick(outcome.total_ms(), verify_real);
  r.timing.simulated_total_ms = p.retrieval_sim_ms + batch.critical_path_ms + outcome.total_ms();
  finish(r, item);
  return r;
}

RunRecord Pipeline::run(const QAItem& item, std::span<const Frame> video) const {
  try {
    switch (config_.mode) {
      case Mode::no_rag: return answer_no_rag(item, video);
      case Mode::standard_rag: return answer_standard_rag(item, video);
      case Mode::speculate_rag: return answer_speculate_rag(item, video);
    }
  } catch (const std::exception& e) {
    RunRecord r = blank_record(item, config_.mode, config_);
    r.error = e.what();
    return r;
  }
  return blank_record(item, config_.mode, config_);
}

RunRecord Pipeline::run(const QAItem& item) const {
  std::vector<Frame> video;
  try {
    video = load_frame_directory(item.frame_dir);
  } catch (const std::exception& e) {
    RunRecord r = blank_record(item, config_.mode, config_);
    r.error = e.what();
    return r;
  }
  return run(item, video);
}

}  // namespace vsrag
