#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vsrag {

enum class Role { system, user, assistant };
enum class ModelTag { drafter, verifier };

std::string_view to_string(Role role) noexcept;
std::string_view to_string(ModelTag tag) noexcept;
Role parse_role(std::string_view text);
ModelTag parse_model_tag(std::string_view text);

struct ChatMessage {
  Role role = Role::user;
  std::string text;
  bool operator==(const ChatMessage&) const = default;
};

/// Inline raster image, base64 encoded.
struct ImagePayload {
  std::string media_type;
  std::string data;
  bool operator==(const ImagePayload&) const = default;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  std::vector<ImagePayload> images;
  bool want_first_token_distribution = false;
  int max_new_tokens = 32;
  ModelTag model_tag = ModelTag::drafter;
  bool operator==(const ChatRequest&) const = default;
};

struct TokenProbability {
  std::string token;
  double prob = 0.0;
  bool operator==(const TokenProbability&) const = default;
};

struct ChatResponse {
  std::string text;
  std::optional<std::vector<TokenProbability>> first_token_distribution;
  int input_token_count = 0;
  int output_token_count = 0;
  double wall_time_ms = 0.0;
  bool operator==(const ChatResponse&) const = default;
};

/// Exactly one of `text` / `image` is set.
struct EmbedRequest {
  std::optional<std::string> text;
  std::optional<ImagePayload> image;
  bool operator==(const EmbedRequest&) const = default;

  static EmbedRequest for_text(std::string t) { return EmbedRequest{std::move(t), std::nullopt}; }
  static EmbedRequest for_image(ImagePayload p) { return EmbedRequest{std::nullopt, std::move(p)}; }
};

struct EmbedResponse {
  std::vector<double> embedding;
  double wall_time_ms = 0.0;
  std::size_t dim() const noexcept { return embedding.size(); }
  bool operator==(const EmbedResponse&) const = default;
};

struct HealthInfo {
  std::string status = "ok";
  std::size_t dim = 0;
  std::vector<std::string> model_tags;
  bool operator==(const HealthInfo&) const = default;
};

/// Simulated cost of one call: overhead + input·per_input + output·per_output (milliseconds).
struct LatencyModel {
  double per_input_token_ms = 0.0;
  double per_output_token_ms = 0.0;
  double fixed_overhead_ms = 0.0;

  double cost_ms(int input_tokens, int output_tokens) const noexcept {
    return fixed_overhead_ms + input_tokens * per_input_token_ms + output_tokens * per_output_token_ms;
  }
  bool operator==(const LatencyModel&) const = default;
};

/// Throws DataError unless the request has a user message and max_new_tokens >= 1.
void validate(const ChatRequest& request);
void validate(const EmbedRequest& request);
void validate(const LatencyModel& model);

/// Whitespace-delimited word count; the token proxy used by the mock backend.
int count_tokens(std::string_view text) noexcept;

/// Stable digest of the decoded image bytes (hex FNV-1a). Throws DataError on invalid base64.
std::string image_digest(const ImagePayload& image);

/// Fixture key of a chat request: hash over role-tagged message texts plus image digests.
std::string fixture_key(const ChatRequest& request);

// Wire (de)serialization. Parsers throw DataError on schema violations.
nlohmann::ordered_json to_json(const ChatRequest& r);
nlohmann::ordered_json to_json(const ChatResponse& r);
nlohmann::ordered_json to_json(const EmbedRequest& r);
nlohmann::ordered_json to_json(const EmbedResponse& r);
nlohmann::ordered_json to_json(const HealthInfo& h);
nlohmann::ordered_json to_json(const LatencyModel& m);

ChatRequest chat_request_from_json(const nlohmann::json& j);
ChatResponse chat_response_from_json(const nlohmann::json& j);
EmbedRequest embed_request_from_json(const nlohmann::json& j);
EmbedResponse embed_response_from_json(const nlohmann::json& j);
HealthInfo health_from_json(const nlohmann::json& j);
LatencyModel latency_model_from_json(const nlohmann::json& j);

}  // namespace vsrag
