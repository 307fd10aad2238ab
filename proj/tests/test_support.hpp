#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vsrag/backend.hpp"
#include "vsrag/errors.hpp"
#include "vsrag/frame.hpp"
#include "vsrag/mock_backend.hpp"
#include "vsrag/prompts.hpp"

namespace vsrag::testing {

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("vsrag-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> basis(std::size_t dim, std::size_t i) {
  std::vector<double> v(dim, 0.0);
  v[i] = 1.0;
  return v;
}

inline Frame random_frame(std::size_t index, int w, int h, std::mt19937_64& rng) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& p : px) p = static_cast<std::uint8_t>(d(rng));
  return make_frame(index, w, h, std::move(px));
}

inline ChatFixture text_fixture(std::string text) { return ChatFixture{std::move(text), std::nullopt, std::nullopt, std::nullopt}; }
inline ChatFixture yes_no_fixture(double yes, double no) { return ChatFixture{std::nullopt, yes, no, std::nullopt}; }

/// Scripts mock responses through the same request builders the engine uses.
struct Script {
  MockFixtures fixtures;
  PromptTemplateSet templates = PromptTemplateSet::defaults();
  TokenLimits limits;

  void chain(std::span<const ImagePayload> images, const std::string& question, const std::string& doc_text,
             const std::string& entity, const std::string& rationale, const std::string& answer) {
    fixtures.chat_fixtures[fixture_key(entity_request(images, doc_text, templates, limits))] = text_fixture(entity);
    fixtures.chat_fixtures[fixture_key(rationale_request(images, question, entity, doc_text, templates, limits))] =
        text_fixture(rationale);
    fixtures.chat_fixtures[fixture_key(answer_request(images, question, entity, rationale, templates, limits))] =
        text_fixture(answer);
  }
  void verdict(std::span<const ImagePayload> images, const std::string& question, const std::string& answer,
               const std::string& entity, const std::string& rationale, double yes) {
    fixtures.chat_fixtures[fixture_key(verify_request(images, question, answer, entity, rationale, templates))] =
        yes_no_fixture(yes, 1.0 - yes);
  }
  void pin(const std::string& text, std::vector<double> v) { fixtures.embed_fixtures[text] = std::move(v); }
  void pin(const ImagePayload& image, std::vector<double> v) {
    fixtures.embed_fixtures[image_fixture_key(image)] = std::move(v);
  }
};

/// Delegates to another backend but fails chats whose fixture key is in `failing`.
class FailingBackend final : public InferenceBackend {
 public:
  FailingBackend(std::shared_ptr<InferenceBackend> inner, std::vector<std::string> failing)
      : inner_(std::move(inner)), failing_(std::move(failing)) {}
  ChatResponse chat(const ChatRequest& r) override {
    const auto key = fixture_key(r);
    for (const auto& f : failing_) {
      if (f == key) throw BackendError(500, "scripted failure");
    }
    return inner_->chat(r);
  }
  EmbedResponse embed(const EmbedRequest& r) override { return inner_->embed(r); }
  HealthInfo health() override { return inner_->health(); }

 private:
  std::shared_ptr<InferenceBackend> inner_;
  std::vector<std::string> failing_;
};

}  // namespace vsrag::testing
