#include "vsrag/protocol.hpp"

#include <cctype>

#include "vsrag/base64.hpp"
#include "vsrag/errors.hpp"
#include "vsrag/hash.hpp"

namespace vsrag {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

std::string_view to_string(ModelTag tag) noexcept {
  return tag == ModelTag::drafter ? "drafter" : "verifier";
}

Role parse_role(std::string_view text) {
  if (text == "system") return Role::system;
  if (text == "user") return Role::user;
  if (text == "assistant") return Role::assistant;
  throw DataError("unknown role '" + std::string(text) + "'");
}

ModelTag parse_model_tag(std::string_view text) {
  if (text == "drafter") return ModelTag::drafter;
  if (text == "verifier") return ModelTag::verifier;
  throw DataError("unknown model_tag '" + std::string(text) + "'");
}

void validate(const ChatRequest& request) {
  bool has_user = false;
  for (const auto& m : request.messages) has_user = has_user || m.role == Role::user;
  if (!has_user) throw DataError("chat request needs at least one user message");
  if (request.max_new_tokens < 1) throw DataError("max_new_tokens must be >= 1");
}

void validate(const EmbedRequest& request) {
  if (request.text.has_value() == request.image.has_value()) {
    throw DataError("embed request needs exactly one of text or image");
  }
  if (request.text && request.text->empty()) throw DataError("embed text is empty");
}

void validate(const LatencyModel& model) {
  if (model.per_input_token_ms < 0 || model.per_output_token_ms < 0 || model.fixed_overhead_ms < 0) {
    throw DataError("latency model fields must be non-negative");
  }
}

int count_tokens(std::string_view text) noexcept {
  int n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::string image_digest(const ImagePayload& image) {
  const auto bytes = base64_decode(image.data);
  if (!bytes) throw DataError("image payload is not valid base64");
  return Fnv1a{}.update(std::span<const std::uint8_t>(*bytes)).hex();
}

std::string fixture_key(const ChatRequest& request) {
  Fnv1a h;
  for (const auto& m : request.messages) {
    h.update(to_string(m.role)).update("\x1f").update(m.text).update("\x1e");
  }
  for (const auto& img : request.images) h.update("img:").update(image_digest(img)).update("\x1e");
  return h.hex();
}

namespace {

template <typename T>
T field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw DataError(std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("field '") + name + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& j, const char* name, T fallback) {
  if (!j.is_object() || !j.contains(name) || j.at(name).is_null()) return fallback;
  return field<T>(j, name);
}

ordered_json image_json(const ImagePayload& p) {
  ordered_json j;
  j["media_type"] = p.media_type;
  j["data"] = p.data;
  return j;
}

ImagePayload image_from_json(const json& j) {
  return ImagePayload{field<std::string>(j, "media_type"), field<std::string>(j, "data")};
}

}  // namespace

ordered_json to_json(const ChatRequest& r) {
  ordered_json j;
  j["model_tag"] = to_string(r.model_tag);
  j["messages"] = ordered_json::array();
  for (const auto& m : r.messages) j["messages"].push_back({{"role", to_string(m.role)}, {"content", m.text}});
  j["images"] = ordered_json::array();
  for (const auto& img : r.images) j["images"].push_back(image_json(img));
  j["want_first_token_distribution"] = r.want_first_token_distribution;
  j["max_new_tokens"] = r.max_new_tokens;
  return j;
}

ChatRequest chat_request_from_json(const json& j) {
  ChatRequest r;
  r.model_tag = parse_model_tag(field<std::string>(j, "model_tag"));
  const auto messages = field<json>(j, "messages");
  if (!messages.is_array()) throw DataError("messages must be an array");
  for (const auto& m : messages) {
    r.messages.push_back(ChatMessage{parse_role(field<std::string>(m, "role")), field<std::string>(m, "content")});
  }
  const auto images = field_or<json>(j, "images", json::array());
  if (!images.is_array()) throw DataError("images must be an array");
  for (const auto& img : images) r.images.push_back(image_from_json(img));
  r.want_first_token_distribution = field_or<bool>(j, "want_first_token_distribution", false);
  r.max_new_tokens = field_or<int>(j, "max_new_tokens", 32);
  validate(r);
  return r;
}

ordered_json to_json(const ChatResponse& r) {
  ordered_json j;
  j["text"] = r.text;
  if (r.first_token_distribution) {
    j["first_token_distribution"] = ordered_json::array();
    for (const auto& t : *r.first_token_distribution) {
      j["first_token_distribution"].push_back({{"token", t.token}, {"prob", t.prob}});
    }
  } else {
    j["first_token_distribution"] = nullptr;
  }
  j["input_token_count"] = r.input_token_count;
  j["output_token_count"] = r.output_token_count;
  j["wall_time_ms"] = r.wall_time_ms;
  return j;
}

ChatResponse chat_response_from_json(const json& j) {
  ChatResponse r;
  r.text = field<std::string>(j, "text");
  if (j.contains("first_token_distribution") && !j["first_token_distribution"].is_null()) {
    std::vector<TokenProbability> dist;
    double total = 0.0;
    for (const auto& t : j["first_token_distribution"]) {
      TokenProbability tp{field<std::string>(t, "token"), field<double>(t, "prob")};
      if (tp.prob < 0.0 || tp.prob > 1.0) throw DataError("token probability outside [0, 1]");
      total += tp.prob;
      dist.push_back(std::move(tp));
    }
    if (total > 1.0 + 1e-6) throw DataError("first-token probabilities sum above 1");
    r.first_token_distribution = std::move(dist);
  }
  r.input_token_count = field_or<int>(j, "input_token_count", 0);
  r.output_token_count = field_or<int>(j, "output_token_count", 0);
  r.wall_time_ms = field_or<double>(j, "wall_time_ms", 0.0);
  return r;
}

ordered_json to_json(const EmbedRequest& r) {
  ordered_json j;
  if (r.text) j["text"] = *r.text;
  if (r.image) j["image"] = image_json(*r.image);
  return j;
}

EmbedRequest embed_request_from_json(const json& j) {
  EmbedRequest r;
  if (j.is_object() && j.contains("text")) r.text = field<std::string>(j, "text");
  if (j.is_object() && j.contains("image")) r.image = image_from_json(j["image"]);
  validate(r);
  return r;
}

ordered_json to_json(const EmbedResponse& r) {
  ordered_json j;
  j["embedding"] = r.embedding;
  j["dim"] = r.embedding.size();
  j["wall_time_ms"] = r.wall_time_ms;
  return j;
}

EmbedResponse embed_response_from_json(const json& j) {
  EmbedResponse r;
  r.embedding = field<std::vector<double>>(j, "embedding");
  if (j.contains("dim") && field<std::size_t>(j, "dim") != r.embedding.size()) {
    throw DataError("embedding length does not match declared dim");
  }
  r.wall_time_ms = field_or<double>(j, "wall_time_ms", 0.0);
  return r;
}

ordered_json to_json(const HealthInfo& h) {
  ordered_json j;
  j["status"] = h.status;
  j["dim"] = h.dim;
  j["model_tags"] = h.model_tags;
  return j;
}

HealthInfo health_from_json(const json& j) {
  return HealthInfo{field<std::string>(j, "status"), field<std::size_t>(j, "dim"),
                    field<std::vector<std::string>>(j, "model_tags")};
}

ordered_json to_json(const LatencyModel& m) {
  ordered_json j;
  j["per_input_token_ms"] = m.per_input_token_ms;
  j["per_output_token_ms"] = m.per_output_token_ms;
  j["fixed_overhead_ms"] = m.fixed_overhead_ms;
  return j;
}

LatencyModel latency_model_from_json(const json& j) {
  LatencyModel m{field_or<double>(j, "per_input_token_ms", 0.0), field_or<double>(j, "per_output_token_ms", 0.0),
                 field_or<double>(j, "fixed_overhead_ms", 0.0)};
  validate(m);
  return m;
}

}  // namespace vsrag
