#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include <httplib.h>

#include "test_support.hpp"
#include "vsrag/errors.hpp"
#include "vsrag/http_backend.hpp"
#include "vsrag/mock_server.hpp"

using namespace vsrag;

namespace {

ChatRequest verify_chat(const std::string& text) {
  ChatRequest r;
  r.messages.push_back(ChatMessage{Role::user, text});
  r.max_new_tokens = 1;
  r.want_first_token_distribution = true;
  r.model_tag = ModelTag::verifier;
  return r;
}

MockFixtures sample_fixtures() {
  MockFixtures f;
  f.seed = 17;
  f.dim = 8;
  f.chat_fixtures[fixture_key(verify_chat("is it?"))] = vsrag::testing::yes_no_fixture(0.8, 0.2);
  f.latency["verifier"] = LatencyModel{1.0, 30.0, 200.0};
  return f;
}

}  // namespace

TEST(Http, ServedMockMatchesInProcessMock) {
  auto backend = std::make_shared<MockBackend>(sample_fixtures());
  MockServer server(backend);
  server.start();
  HttpBackend client(server.url());
  MockBackend local(sample_fixtures());

  EXPECT_EQ(client.chat(verify_chat("is it?")), local.chat(verify_chat("is it?")));
  EXPECT_EQ(client.chat(verify_chat("unscripted")), local.chat(verify_chat("unscripted")));
  EXPECT_EQ(client.embed(EmbedRequest::for_text("squid")), local.embed(EmbedRequest::for_text("squid")));
  const auto h = client.health();
  EXPECT_EQ(h.status, "ok");
  EXPECT_EQ(h.dim, 8u);
  server.stop();
}

TEST(Http, TwoServersGiveByteIdenticalResponses) {
  MockServer a(std::make_shared<MockBackend>(sample_fixtures()));
  MockServer b(std::make_shared<MockBackend>(sample_fixtures()));
  a.start();
  b.start();
  HttpBackend ca(a.url()), cb(b.url());
  for (const char* q : {"is it?", "one", "two", "three"}) {
    EXPECT_EQ(to_json(ca.chat(verify_chat(q))).dump(), to_json(cb.chat(verify_chat(q))).dump());
  }
}

TEST(Http, MalformedBodiesAreRejectedWith400) {
  MockServer server(std::make_shared<MockBackend>(sample_fixtures()));
  const int port = server.start();
  httplib::Client raw("127.0.0.1", port);
  auto bad_schema = to_json(verify_chat("x"));
  bad_schema["max_new_tokens"] = 0;
  const auto a = raw.Post("/v1/chat", bad_schema.dump(), "application/json");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->status, 400);
  const auto b = raw.Post("/v1/chat", "not json", "application/json");
  ASSERT_TRUE(b);
  EXPECT_EQ(b->status, 400);
}

TEST(Http, ServerErrorsSurfaceAsBackendError) {
  httplib::Server stub;
  stub.Post("/v1/chat", [](const httplib::Request&, httplib::Response& res) {
    res.status = 400;
    res.set_content(R"({"error":"bad request"})", "application/json");
  });
  const int port = stub.bind_to_any_port("127.0.0.1");
  std::thread t([&] { stub.listen_after_bind(); });
  stub.wait_until_ready();
  HttpBackend client("http://127.0.0.1:" + std::to_string(port));
  try {
    client.chat(verify_chat("x"));
    ADD_FAILURE() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status(), 400);
  }
  stub.stop();
  t.join();
}

TEST(Http, UnreachableServerIsTransportError) {
  int port = 0;
  {
    MockServer probe(std::make_shared<MockBackend>(sample_fixtures()));
    port = probe.start();
  }
  HttpOptions opts;
  opts.connect_timeout = std::chrono::milliseconds(200);
  HttpBackend client("http://127.0.0.1:" + std::to_string(port), opts);
  EXPECT_THROW(client.health(), TransportError);
}

TEST(Http, BusyPortIsRejected) {
  MockServer a(std::make_shared<MockBackend>(sample_fixtures()));
  const int port = a.start();
  MockServer b(std::make_shared<MockBackend>(sample_fixtures()));
  EXPECT_THROW(b.start(port), ConfigError);
}

TEST(Endpoints, FactoryParsesSchemes) {
  vsrag::testing::TempDir dir;
  sample_fixtures().save(dir.path() / "f.json");
  const auto a = make_backend("mock:" + (dir.path() / "f.json").string());
  const auto b = make_backend("mock:" + (dir.path() / "f.json").string());
  EXPECT_EQ(a.get(), b.get());
  EXPECT_EQ(a->health().dim, 8u);
  EXPECT_THROW(make_backend("ftp://nowhere"), ConfigError);
  EXPECT_THROW(HttpBackend("http://host-without-port"), ConfigError);
  EXPECT_THROW(make_backend("mock:" + (dir.path() / "missing.json").string()), DataError);
}
