#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace trailwatch {

/// Base class for domain failures so callers can catch everything below once.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or contradictory configuration text. Message carries the key path
/// and, where known, the line number.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Area-level consistency failure. Collects every violation instead of
/// stopping at the first so a bad file is fixable in one pass.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> failures)
      : Error(join(failures)), failures_(std::move(failures)) {}

  const std::vector<std::string>& failures() const { return failures_; }

 private:
  static std::string join(const std::vector<std::string>& fs) {
    std::string out = "area validation failed:";
    for (const auto& f : fs) {
      out += "\n  - ";
      out += f;
    }
    return out;
  }
  std::vector<std::string> failures_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Write for a tourist that already departed; the repository refuses it.
class StaleWriteError : public Error {
 public:
  using Error::Error;
};

/// Publish or subscribe on a closed broker.
class BrokerClosedError : public Error {
 public:
  using Error::Error;
};

/// Formula/trace text mentioning an identifier outside the fixed vocabulary.
class VocabularyError : public Error {
 public:
  using Error::Error;
};

/// Statistic that is undefined on the given input (e.g. zero variance).
class UndefinedStatError : public Error {
 public:
  using Error::Error;
};

/// Position cannot be established: fewer than two station measurements and no
/// satellite fix. The tourist is flagged and skipped for the cycle.
class UnlocatableError : public Error {
 public:
  using Error::Error;
};

/// Corrupt sensor payload (NaN/infinite reading); the datum is dropped.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace trailwatch
