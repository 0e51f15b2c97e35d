#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdpclik {

enum class ErrorKind {
  TaskModelMismatch,
  RankDeficient,
  EmptyStack,
  DimensionMismatch,
  InvalidParameter,
  Config,
  SimulationAbort,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a Jacobian (or an augmented Jacobian) loses row rank.
/// `level` is the 1-based priority level that failed, or 0 when the matrix
/// was not tied to a task stack.
class RankDeficientError : public Error {
 public:
  RankDeficientError(int level, const std::string& what)
      : Error(ErrorKind::RankDeficient, what), level_(level) {}

  int level() const noexcept { return level_; }

 private:
  int level_;
};

/// Configuration problem. `path` is a slash-separated key path into the
/// scenario document (e.g. "/tasks/1/kind").
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(ErrorKind::Config, (path.empty() ? std::string("/") : path) + ": " + what),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Simulation stopped before the horizon; `step` is the failing step index.
class SimulationAbort : public Error {
 public:
  SimulationAbort(long step, const std::string& what)
      : Error(ErrorKind::SimulationAbort, "step " + std::to_string(step) + ": " + what),
        step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace sdpclik
