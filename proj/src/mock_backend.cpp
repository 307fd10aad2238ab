#include "vsrag/mock_backend.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "vsrag/base64.hpp"
#include "vsrag/errors.hpp"
#include "vsrag/hash.hpp"
#include "vsrag/image_io.hpp"

namespace vsrag {

namespace {

constexpr std::array<std::string_view, 16> kVocabulary = {
    "the",   "river", "stone", "north", "amber", "grove", "signal", "harbor",
    "quiet", "delta", "ridge", "lumen", "ember", "coast", "meadow", "summit"};

std::vector<double> unit(std::vector<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (!(sq > 0.0)) throw DataError("fixture embedding has zero norm");
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
  return v;
}

std::string truncate_words(const std::string& text, int max_words) {
  if (count_tokens(text) <= max_words) return text;
  std::istringstream in(text);
  std::string word;
  std::string out;
  for (int i = 0; i < max_words && (in >> word); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

std::vector<TokenProbability> yes_no(double yes, double no) {
  std::vector<TokenProbability> d{{"Yes", yes}, {"No", no}};
  std::stable_sort(d.begin(), d.end(), [](const auto& a, const auto& b) { return a.prob > b.prob; });
  return d;
}

}  // namespace

MockFixtures MockFixtures::parse(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("fixture file must be a JSON object");
  MockFixtures f;
  try {
    f.seed = j.value("seed", std::uint64_t{0});
    f.dim = j.value("dim", std::size_t{64});
    if (f.dim == 0) throw DataError("fixture dim must be positive");
    if (j.contains("chat_fixtures")) {
      for (const auto& [key, v] : j["chat_fixtures"].items()) {
        ChatFixture c;
        if (v.contains("text")) c.text = v["text"].get<std::string>();
        if (v.contains("yes_prob")) c.yes_prob = v["yes_prob"].get<double>();
        if (v.contains("no_prob")) c.no_prob = v["no_prob"].get<double>();
        if (c.yes_prob.has_value() != c.no_prob.has_value()) {
          throw DataError("chat fixture " + key + " must give both yes_prob and no_prob");
        }
        if (v.contains("distribution")) {
          std::vector<TokenProbability> dist;
          for (const auto& pair : v["distribution"]) {
            dist.push_back(TokenProbability{pair.at(0).get<std::string>(), pair.at(1).get<double>()});
          }
          c.distribution = std::move(dist);
        }
        f.chat_fixtures.emplace(key, std::move(c));
      }
    }
    if (j.contains("embed_fixtures")) {
      for (const auto& [key, v] : j["embed_fixtures"].items()) {
        auto vec = v.get<std::vector<double>>();
        if (vec.size() != f.dim) throw DataError("embed fixture '" + key + "' has wrong dim");
        f.embed_fixtures.emplace(key, unit(std::move(vec)));
      }
    }
    if (j.contains("latency")) {
      for (const auto& [tag, v] : j["latency"].items()) f.latency.emplace(tag, latency_model_from_json(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid fixture schema: ") + e.what());
  }
  return f;
}

MockFixtures MockFixtures::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open fixture file " + path.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("fixture file is not valid JSON: " + path.string());
  return parse(j);
}

nlohmann::ordered_json MockFixtures::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["dim"] = dim;
  j["latency"] = nlohmann::ordered_json::object();
  for (const auto& [tag, m] : latency) j["latency"][tag] = vsrag::to_json(m);
  j["chat_fixtures"] = nlohmann::ordered_json::object();
  for (const auto& [key, c] : chat_fixtures) {
    nlohmann::ordered_json v = nlohmann::ordered_json::object();
    if (c.text) v["text"] = *c.text;
    if (c.yes_prob) v["yes_prob"] = *c.yes_prob;
    if (c.no_prob) v["no_prob"] = *c.no_prob;
    if (c.distribution) {
      v["distribution"] = nlohmann::ordered_json::array();
      for (const auto& t : *c.distribution) v["distribution"].push_back({t.token, t.prob});
    }
    j["chat_fixtures"][key] = std::move(v);
  }
  j["embed_fixtures"] = nlohmann::ordered_json::object();
  for (const auto& [key, v] : embed_fixtures) j["embed_fixtures"][key] = v;
  return j;
}

void MockFixtures::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json().dump(1) << '\n';
}

std::string image_fixture_key(const ImagePayload& image) { return "image:" + image_digest(image); }

MockBackend::MockBackend(MockFixtures fixtures, MockOptions options)
    : fixtures_(std::move(fixtures)), options_(options) {}

LatencyModel MockBackend::latency_for(const std::string& tag) const {
  const auto it = fixtures_.latency.find(tag);
  return it == fixtures_.latency.end() ? LatencyModel{} : it->second;
}

void MockBackend::record(LogEntry entry) {
  std::lock_guard lock(log_mutex_);
  log_.push_back(std::move(entry));
}

std::vector<MockBackend::LogEntry> MockBackend::request_log() const {
  std::lock_guard lock(log_mutex_);
  return log_;
}

ChatResponse MockBackend::chat(const ChatRequest& request) {
  validate(request);
  const std::string key = fixture_key(request);
  std::uint64_t stream = fixtures_.seed ^ fnv1a(key);

  int input_tokens = 0;
  for (const auto& m : request.messages) input_tokens += count_tokens(m.text);

  const auto it = fixtures_.chat_fixtures.find(key);
  const ChatFixture* fixture = it == fixtures_.chat_fixtures.end() ? nullptr : &it->second;
  record(LogEntry{"chat", key, fixture != nullptr});

  std::optional<std::vector<TokenProbability>> distribution;
  if (fixture && fixture->distribution) {
    distribution = *fixture->distribution;
  } else if (fixture && fixture->yes_prob) {
    distribution = yes_no(*fixture->yes_prob, *fixture->no_prob);
  } else if (request.want_first_token_distribution) {
    const double yes = 0.05 + 0.9 * unit_double(stream);
    distribution = yes_no(yes, 1.0 - yes);
  }

  ChatResponse response;
  if (fixture && fixture->text) {
    response.text = *fixture->text;
  } else if (distribution && !distribution->empty()) {
    response.text = distribution->front().token;
  } else {
    const int words = 3 + static_cast<int>(uniform_index(stream, 6));
    for (int w = 0; w < words; ++w) {
      if (w > 0) response.text.push_back(' ');
      response.text += kVocabulary[uniform_index(stream, kVocabulary.size())];
    }
  }
  response.text = truncate_words(response.text, request.max_new_tokens);
  if (request.want_first_token_distribution) response.first_token_distribution = std::move(distribution);

  response.input_token_count = input_tokens;
  response.output_token_count = std::max(1, count_tokens(response.text));
  response.wall_time_ms = latency_for(std::string(to_string(request.model_tag)))
                              .cost_ms(response.input_token_count, response.output_token_count);
  if (options_.real_sleep) {
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(response.wall_time_ms));
  }
  return response;
}

EmbedResponse MockBackend::embed(const EmbedRequest& request) {
  validate(request);
  std::string key;
  int input_tokens = 0;
  if (request.text) {
    key = *request.text;
    input_tokens = count_tokens(*request.text);
  } else {
    const auto bytes = base64_decode(request.image->data);
    if (!bytes) throw DataError("undecodable image payload");
    decode_image(*bytes);  // rejects non-images
    key = image_fixture_key(*request.image);
  }

  EmbedResponse response;
  const auto it = fixtures_.embed_fixtures.find(key);
  record(LogEntry{"embed", key, it != fixtures_.embed_fixtures.end()});
  if (it != fixtures_.embed_fixtures.end()) {
    response.embedding = it->second;
  } else {
    std::uint64_t stream = fixtures_.seed ^ fnv1a(key);
    std::vector<double> v(fixtures_.dim);
    for (double& x : v) x = 2.0 * unit_double(stream) - 1.0;
    response.embedding = unit(std::move(v));
  }
  response.wall_time_ms = latency_for("embed").cost_ms(input_tokens, 0);
  if (options_.real_sleep) {
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(response.wall_time_ms));
  }
  return response;
}

HealthInfo MockBackend::health() { return HealthInfo{"ok", fixtures_.dim, {"drafter", "verifier"}}; }

}  // namespace vsrag
