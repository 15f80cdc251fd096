#pragma once

#include <stdexcept>
#include <string>

namespace corpusplay {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or arguments; the CLI maps these to a usage exit code.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IngestError : public Error {
 public:
  using Error::Error;
};

// Network failure, timeout, or a non-success HTTP status after retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

// The server answered, but the body is not what the wire protocol promises.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A run directory cannot be resumed with the requested configuration.
class ResumeError : public Error {
 public:
  using Error::Error;
};

class IterationError : public Error {
 public:
  IterationError(int iteration, std::string doc_id, const std::string& what)
      : Error("iteration " + std::to_string(iteration) + ", document " + doc_id + ": " + what),
        iteration_(iteration),
        doc_id_(std::move(doc_id)) {}

  int iteration() const noexcept { return iteration_; }
  const std::string& doc_id() const noexcept { return doc_id_; }

 private:
  int iteration_;
  std::string doc_id_;
};

}  // namespace corpusplay
