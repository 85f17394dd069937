#pragma once

#include <stdexcept>
#include <string>

namespace bases {

// Root of every error thrown by the library. Callers that only need a
// message can catch this; the subclasses carry structured detail.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition (empty prompt, n == 0, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Bad or inconsistent configuration: missing credentials, live client
// requested while offline, unknown modes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A data file could not be read or failed structural validation.
class LoadError : public Error {
 public:
  LoadError(std::string file, std::size_t line, const std::string& what)
      : Error(file + (line ? ":" + std::to_string(line) : std::string()) +
              ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  // 1-based; 0 when the failure is not tied to a single line.
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// Remote (or mocked) backend failed after exhausting retries.
class BackendError : public Error {
 public:
  BackendError(const std::string& what, int status = 0, int attempts = 1)
      : Error(what), status_(status), attempts_(attempts) {}

  // HTTP status of the last attempt, 0 for transport-level failures.
  int status() const { return status_; }
  int attempts() const { return attempts_; }

 private:
  int status_;
  int attempts_;
};

// LLM output did not contain a recognizable action / verdict.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}

  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// Profile synthesis could not satisfy the contradiction rules.
class SamplingError : public Error {
 public:
  using Error::Error;
};

// An interface contract between components was broken (e.g. a ranker
// returned the wrong number of scores).
class ContractError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace bases
