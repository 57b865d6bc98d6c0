#pragma once

#include <stdexcept>
#include <string>

namespace prism {

// Root of every error raised by the library. Callers that only care about
// "something in the pipeline went wrong" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files (manifests, embedding files, scripts, configs).
class InputError : public Error {
 public:
  using Error::Error;
};

class UnknownLabel : public Error {
 public:
  explicit UnknownLabel(const std::string& raw)
      : Error("unknown label: '" + raw + "'"), raw_(raw) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Retrieval
class ZeroVector : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyIndex : public Error {
 public:
  EmptyIndex() : Error("top_k on an empty index") {}
};

// Prompt rendering
class TemplateError : public Error {
 public:
  using Error::Error;
};

// Backends
class BackendError : public Error {
 public:
  using Error::Error;
};

class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

class TimeoutError : public BackendError {
 public:
  using BackendError::BackendError;
};

class ScriptExhausted : public BackendError {
 public:
  explicit ScriptExhausted(const std::string& tag)
      : BackendError("script exhausted for tag '" + tag + "'"), tag_(tag) {}
  const std::string& tag() const noexcept { return tag_; }

 private:
  std::string tag_;
};

// Model output that cannot be mapped onto the expected structure.
class Unparseable : public Error {
 public:
  using Error::Error;
};

// Evaluation
class EmptyPredictions : public Error {
 public:
  EmptyPredictions() : Error("no predictions to score") {}
};

}  // namespace prism
