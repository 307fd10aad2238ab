#pragma once

#include <stdexcept>
#include <string>

namespace vsrag {

/// Invalid configuration or arguments supplied by the caller.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data that violates a documented invariant (bad frame, duplicate id, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base class for every failure reported by an inference backend.
class BackendFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The request never got a response (connection refused, timeout). Retryable.
class TransportError : public BackendFailure {
 public:
  using BackendFailure::BackendFailure;
};

/// A response arrived but could not be parsed against the wire schema.
class MalformedResponse : public BackendFailure {
 public:
  using BackendFailure::BackendFailure;
};

/// The backend answered with an explicit error status.
class BackendError : public BackendFailure {
 public:
  BackendError(int status, const std::string& message)
      : BackendFailure("backend error " + std::to_string(status) + ": " + message),
        status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace vsrag
