#include "vsrag/draft.hpp"

#include <optional>
#include <variant>

#include "vsrag/fanout.hpp"

namespace vsrag {

namespace {

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::pair<std::string, double> run_step(DraftStep step, InferenceBackend& drafter, const ChatRequest& request) {
  ChatResponse response;
  try {
    response = drafter.chat(request);
  } catch (const std::exception& e) {
    throw DraftStepError(step, e.what());
  }
  std::string text = trimmed(response.text);
  if (text.empty()) throw DraftStepError(step, "empty model output");
  return {std::move(text), response.wall_time_ms};
}

}  // namespace

std::string_view to_string(DraftStep step) noexcept {
  switch (step) {
    case DraftStep::entity: return "entity";
    case DraftStep::rationale: return "rationale";
    case DraftStep::answer: return "answer";
  }
  return "entity";
}

DraftStepError::DraftStepError(DraftStep step, const std::string& message)
    : std::runtime_error(std::string(to_string(step)) + " step: " + message), step_(step) {}

DraftCandidate draft_one(std::span<const ImagePayload> keyframe_images, const std::string& question,
                         const Document& doc, std::size_t ordinal, const PromptTemplateSet& templates,
                         InferenceBackend& drafter, const TokenLimits& limits) {
  if (question.empty()) throw ConfigError("question is empty");
  if (keyframe_images.empty()) throw ConfigError("drafting needs at least one keyframe");

  DraftCandidate c;
  c.doc_id = doc.doc_id;
  c.ordinal = ordinal;
  std::tie(c.entity, c.step_ms[0]) =
      run_step(DraftStep::entity, drafter, entity_request(keyframe_images, doc.text, templates, limits));
  std::tie(c.rationale, c.step_ms[1]) = run_step(
      DraftStep::rationale, drafter, rationale_request(keyframe_images, question, c.entity, doc.text, templates, limits));
  std::tie(c.answer, c.step_ms[2]) = run_step(
      DraftStep::answer, drafter, answer_request(keyframe_images, question, c.entity, c.rationale, templates, limits));
  return c;
}

DraftCandidate draft_one(const KeyframeSet& keyframes, const std::string& question, const Document& doc,
                         std::size_t ordinal, const PromptTemplateSet& templates, InferenceBackend& drafter,
                         const DraftOptions& options) {
  const auto images = keyframe_payloads(keyframes, options.max_keyframes_per_call);
  return draft_one(images, question, doc, ordinal, templates, drafter, options.limits);
}

DraftBatch draft_all(std::span<const ImagePayload> keyframe_images, const std::string& question,
                     std::span<const RetrievalResult> docs, const PromptTemplateSet& templates,
                     InferenceBackend& drafter, const DraftOptions& options) {
  if (docs.empty()) throw ConfigError("draft_all needs at least one document");
  if (options.max_parallel == 0) throw ConfigError("max_parallel must be >= 1");

  std::vector<std::variant<DraftCandidate, DraftFailure>> slots(docs.size());
  bounded_parallel_for(docs.size(), options.max_parallel, [&](std::size_t i) {
    try {
      slots[i] = draft_one(keyframe_images, question, docs[i].doc, i, templates, drafter, options.limits);
    } catch (const DraftStepError& e) {
      slots[i] = DraftFailure{docs[i].doc.doc_id, i, e.step(), e.what()};
    } catch (const std::exception& e) {
      slots[i] = DraftFailure{docs[i].doc.doc_id, i, DraftStep::entity, e.what()};
    }
  });

  DraftBatch batch;
  std::vector<double> chain_ms;
  for (auto& slot : slots) {
    if (auto* c = std::get_if<DraftCandidate>(&slot)) {
      chain_ms.push_back(c->chain_ms());
      batch.candidates.push_back(std::move(*c));
    } else {
      batch.failures.push_back(std::move(std::get<DraftFailure>(slot)));
    }
  }
  if (batch.candidates.empty()) throw NoDraftsError();
  // Failed chains are not charged; their partial cost is unknown to the caller.
  batch.critical_path_ms = list_schedule_makespan(chain_ms, options.max_parallel);
  return batch;
}

DraftBatch draft_all(const KeyframeSet& keyframes, const std::string& question, std::span<const RetrievalResult> docs,
                     const PromptTemplateSet& templates, InferenceBackend& drafter, const DraftOptions& options) {
  const auto images = keyframe_payloads(keyframes, options.max_keyframes_per_call);
  return draft_all(images, question, docs, templates, drafter, options);
}

}  // namespace vsrag
