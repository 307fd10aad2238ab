#pragma once

#include <memory>
#include <string>

#include "vsrag/protocol.hpp"

namespace vsrag {

/// Model-agnostic inference endpoint. Implementations must be safe for concurrent calls.
/// Failures are reported as TransportError, MalformedResponse or BackendError.
class InferenceBackend {
 public:
  virtual ~InferenceBackend() = default;
  virtual ChatResponse chat(const ChatRequest& request) = 0;
  virtual EmbedResponse embed(const EmbedRequest& request) = 0;
  virtual HealthInfo health() = 0;
};

/// The three roles the pipeline talks to. They may all point at the same backend.
struct Backends {
  std::shared_ptr<InferenceBackend> drafter;
  std::shared_ptr<InferenceBackend> verifier;
  std::shared_ptr<InferenceBackend> embedder;

  static Backends all(std::shared_ptr<InferenceBackend> one) { return Backends{one, one, one}; }
};

/// "http://host:port" -> HttpBackend; "mock:<fixtures.json>" -> in-process MockBackend (virtual time).
/// Mock endpoints naming the same fixture file share one instance within a process.
std::shared_ptr<InferenceBackend> make_backend(const std::string& endpoint);

}  // namespace vsrag
