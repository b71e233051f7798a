#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vgb {

// Root of every error the harness throws. Callers that only need to report a
// failure can catch this; the subclasses exist so callers can react to the
// failure kind (e.g. retry on RateLimitError, abort on AuthError).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
public:
  using Error::Error;
};

// An exact solver was asked to work past its node cap.
class CapacityError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class GenerationError : public Error {
public:
  using Error::Error;
};

class SamplingError : public Error {
public:
  using Error::Error;
};

class LayoutError : public Error {
public:
  using Error::Error;
};

class RenderError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

// llm-client failures. Each is distinct so the runner can list them
// separately in its failure manifest.
class AuthError : public Error {
public:
  using Error::Error;
};

class RateLimitError : public Error {
public:
  using Error::Error;
};

class ReplayMissError : public Error {
public:
  using Error::Error;
};

class TransportError : public Error {
public:
  using Error::Error;
};

} // namespace vgb
