#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "vsrag/backend.hpp"

namespace vsrag {

struct ChatFixture {
  std::optional<std::string> text;
  std::optional<double> yes_prob;
  std::optional<double> no_prob;
  /// Explicit first-token distribution; overrides yes_prob / no_prob when present.
  std::optional<std::vector<TokenProbability>> distribution;
};

/// Mock fixture file contents.
///   {"seed": n, "dim": d,
///    "chat_fixtures":  {"<fixture_key>": {"text": ..., "yes_prob": ..., "no_prob": ..., "distribution": [[tok, p], ...]}},
///    "embed_fixtures": {"<text literal>" | "image:<digest>": [v0, v1, ...]},
///    "latency": {"drafter": {...}, "verifier": {...}, "embed": {...}}}
struct MockFixtures {
  std::uint64_t seed = 0;
  std::size_t dim = 64;
  std::map<std::string, ChatFixture> chat_fixtures;
  std::map<std::string, std::vector<double>> embed_fixtures;
  std::map<std::string, LatencyModel> latency;

  static MockFixtures parse(const nlohmann::json& j);
  static MockFixtures load(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;
  void save(const std::filesystem::path& path) const;
};

/// Embed-fixture key for an image payload.
std::string image_fixture_key(const ImagePayload& image);

struct MockOptions {
  /// Sleep for the simulated wall time before answering.
  bool real_sleep = false;
};

/// Deterministic backend: every response is a pure function of (request, seed, fixtures).
class MockBackend final : public InferenceBackend {
 public:
  explicit MockBackend(MockFixtures fixtures, MockOptions options = {});

  ChatResponse chat(const ChatRequest& request) override;
  EmbedResponse embed(const EmbedRequest& request) override;
  HealthInfo health() override;

  struct LogEntry {
    std::string kind;  ///< "chat" or "embed"
    std::string key;
    bool fixture_hit = false;
  };
  std::vector<LogEntry> request_log() const;

  const MockFixtures& fixtures() const noexcept { return fixtures_; }

 private:
  LatencyModel latency_for(const std::string& tag) const;
  void record(LogEntry entry);

  MockFixtures fixtures_;
  MockOptions options_;
  mutable std::mutex log_mutex_;
  std::vector<LogEntry> log_;
};

}  // namespace vsrag
