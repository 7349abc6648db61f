#pragma once

#include <stdexcept>
#include <string>

namespace ddiff {

/// Precondition violated by the caller (bad shape, out-of-range parameter).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative numerical routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver iterate became non-finite or exceeded the divergence bound.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int step, const std::string& what)
      : std::runtime_error("diverged at step " + std::to_string(step) + ": " + what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

/// Failure talking to a remote score server. The kind distinguishes the
/// failure modes so callers can report them separately.
class ScoreTransportError : public std::runtime_error {
 public:
  enum class Kind { connect, timeout, transport, malformed, shape_mismatch, remote };

  ScoreTransportError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Malformed or truncated DDT1 payload.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent configuration. `line` is 0 when no single line is at fault.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what)
      : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + what
                                    : (source.empty() ? what : source + ": " + what)),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// File system failure while reading inputs or writing outputs.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ddiff
