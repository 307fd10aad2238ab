#include "vsrag/prompts.hpp"

#include <fstream>
#include <sstream>

#include "vsrag/base64.hpp"
#include "vsrag/errors.hpp"
#include "vsrag/hash.hpp"
#include "vsrag/image_io.hpp"

namespace vsrag {

namespace {

struct Slot {
  const char* name;
  std::string PromptTemplateSet::*text;
  std::set<std::string> required;
};

const std::vector<Slot>& slots() {
  static const std::vector<Slot> kSlots = {
      {"entity", &PromptTemplateSet::entity, {"document"}},
      {"rationale", &PromptTemplateSet::rationale, {"question", "entity", "document"}},
      {"answer", &PromptTemplateSet::answer, {"question", "entity", "rationale"}},
      {"verify", &PromptTemplateSet::verify, {"question", "answer", "entity", "rationale"}},
      {"self_consistent", &PromptTemplateSet::self_consistent, {"question", "answer"}},
      {"standard_rag", &PromptTemplateSet::standard_rag, {"question", "documents"}},
      {"no_rag", &PromptTemplateSet::no_rag, {"question"}},
  };
  return kSlots;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

ChatRequest user_request(std::string text, std::span<const ImagePayload> images, int max_new_tokens, ModelTag tag,
                         bool want_distribution = false) {
  ChatRequest r;
  r.messages.push_back(ChatMessage{Role::user, std::move(text)});
  r.images.assign(images.begin(), images.end());
  r.max_new_tokens = max_new_tokens;
  r.model_tag = tag;
  r.want_first_token_distribution = want_distribution;
  return r;
}

}  // namespace

PromptTemplateSet PromptTemplateSet::defaults() {
  PromptTemplateSet t;
  t.entity =
      "List the main visible entity in these frames that this document could describe. Document: {document}. "
      "Answer with the entity name only.";
  t.rationale =
      "Question: {question}. The video shows {entity}. Using this document as evidence: {document}, state one "
      "sentence of reasoning linking the entity to the answer.";
  t.answer = "Question: {question}. Entity: {entity}. Reasoning: {rationale}. Give the final short answer only.";
  t.verify =
      "Question: {question}. Proposed answer: {answer}. Entity seen in the video: {entity}. Reasoning: {rationale}. "
      "Does this reasoning support this answer? Reply Yes or No.";
  t.self_consistent = "Question: {question}. Proposed answer: {answer}. Is this answer correct? Reply Yes or No.";
  t.standard_rag =
      "Question: {question}.\nDocuments:\n{documents}\nUsing the video and the documents, give the final short "
      "answer only.";
  t.no_rag = "Question: {question}. Using the video, give the final short answer only.";
  return t;
}

PromptTemplateSet PromptTemplateSet::parse(std::string_view text) {
  PromptTemplateSet t = defaults();
  std::istringstream in{std::string(text)};
  std::string line;
  std::string current;
  std::map<std::string, std::string> sections;
  while (std::getline(in, line)) {
    const std::string stripped = trim(line);
    if (stripped.size() > 2 && stripped.front() == '[' && stripped.back() == ']' &&
        stripped.find(' ') == std::string::npos) {
      current = stripped.substr(1, stripped.size() - 2);
      if (sections.contains(current)) throw ConfigError("template section [" + current + "] appears twice");
      sections[current];
      continue;
    }
    if (current.empty()) {
      if (!stripped.empty() && stripped.front() != '#') throw ConfigError("template text outside of a section");
      continue;
    }
    auto& body = sections[current];
    if (!body.empty()) body.push_back('\n');
    body += line;
  }
  for (auto& [name, body] : sections) {
    body = trim(body);
    if (name == "label") {
      t.label = body;
      continue;
    }
    bool known = false;
    for (const auto& slot : slots()) {
      if (name == slot.name) {
        t.*slot.text = body;
        known = true;
      }
    }
    if (!known) throw ConfigError("unknown template section [" + name + "]");
  }
  t.validate();
  return t;
}

PromptTemplateSet PromptTemplateSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open template file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string PromptTemplateSet::version() const {
  Fnv1a h;
  for (const auto& slot : slots()) h.update(slot.name).update("\x1f").update(this->*slot.text).update("\x1e");
  return label + "-" + h.hex().substr(0, 8);
}

void PromptTemplateSet::validate() const {
  for (const auto& slot : slots()) {
    const auto found = placeholders(this->*slot.text);
    if (found != slot.required) {
      std::string want;
      for (const auto& r : slot.required) want += " {" + r + "}";
      throw ConfigError(std::string("template '") + slot.name + "' must contain exactly:" + want);
    }
  }
}

std::set<std::string> placeholders(std::string_view tmpl) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] != '{') continue;
    const auto close = tmpl.find('}', i + 1);
    if (close == std::string_view::npos) break;
    const auto name = tmpl.substr(i + 1, close - i - 1);
    const bool ident = !name.empty() && name.find_first_not_of("abcdefghijklmnopqrstuvwxyz_") == std::string_view::npos;
    if (ident) {
      out.emplace(name);
      i = close;
    }
  }
  return out;
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size() + 64);
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close;
          continue;
        }
      }
    }
    out.push_back(tmpl[i]);
  }
  return out;
}

ImagePayload frame_payload(const Frame& frame) {
  return ImagePayload{std::string(kPpmMediaType), base64_encode(std::span<const std::uint8_t>(encode_ppm(frame)))};
}

std::vector<ImagePayload> keyframe_payloads(const KeyframeSet& keyframes, std::size_t max_frames) {
  const std::size_t n = keyframes.size();
  const std::size_t m = std::min(n, std::max<std::size_t>(1, max_frames));
  std::vector<ImagePayload> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(frame_payload(keyframes.frames[i * n / m]));
  return out;
}

ChatRequest entity_request(std::span<const ImagePayload> images, const std::string& document,
                           const PromptTemplateSet& templates, const TokenLimits& limits) {
  return user_request(render(templates.entity, {{"document", document}}), images, limits.entity, ModelTag::drafter);
}

ChatRequest rationale_request(std::span<const ImagePayload> images, const std::string& question,
                              const std::string& entity, const std::string& document,
                              const PromptTemplateSet& templates, const TokenLimits& limits) {
  return user_request(
      render(templates.rationale, {{"question", question}, {"entity", entity}, {"document", document}}), images,
      limits.rationale, ModelTag::drafter);
}

ChatRequest answer_request(std::span<const ImagePayload> images, const std::string& question,
                           const std::string& entity, const std::string& rationale,
                           const PromptTemplateSet& templates, const TokenLimits& limits) {
  return user_request(
      render(templates.answer, {{"question", question}, {"entity", entity}, {"rationale", rationale}}), images,
      limits.answer, ModelTag::drafter);
}

ChatRequest verify_request(std::span<const ImagePayload> images, const std::string& question,
                           const std::string& answer, const std::string& entity, const std::string& rationale,
                           const PromptTemplateSet& templates) {
  return user_request(render(templates.verify, {{"question", question},
                                                {"answer", answer},
                                                {"entity", entity},
                                                {"rationale", rationale}}),
                      images, 1, ModelTag::verifier, true);
}

ChatRequest self_consistent_request(std::span<const ImagePayload> images, const std::string& question,
                                    const std::string& answer, const PromptTemplateSet& templates) {
  return user_request(render(templates.self_consistent, {{"question", question}, {"answer", answer}}), images, 1,
                      ModelTag::verifier, true);
}

ChatRequest standard_rag_request(std::span<const ImagePayload> images, const std::string& question,
                                 std::span<const std::string> documents, const PromptTemplateSet& templates,
                                 const TokenLimits& limits, ModelTag tag) {
  std::string joined;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (i > 0) joined.push_back('\n');
    joined += "[" + std::to_string(i + 1) + "] " + documents[i];
  }
  return user_request(render(templates.standard_rag, {{"question", question}, {"documents", joined}}), images,
                      limits.baseline_answer, tag);
}

ChatRequest no_rag_request(std::span<const ImagePayload> images, const std::string& question,
                           const PromptTemplateSet& templates, const TokenLimits& limits, ModelTag tag) {
  return user_request(render(templates.no_rag, {{"question", question}}), images, limits.baseline_answer, tag);
}

}  // namespace vsrag
