#pragma once

#include <stdexcept>
#include <string>

namespace antipower {

// Process exit codes shared by every subcommand.
enum class ExitCode : int {
  ok = 0,
  runtime_failure = 1,
  usage = 2,
  capability = 3,
};

// Bad flags or arguments supplied by the caller.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The host lacks something a backend needs (powercap, procfs, ...).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rank-deficient design matrix. Carries the offending column.
class SingularDesignError : public std::runtime_error {
 public:
  SingularDesignError(std::size_t column, const std::string& name)
      : std::runtime_error("design matrix is rank deficient: column " + std::to_string(column) +
                           (name.empty() ? std::string{} : " (" + name + ")") +
                           " is a linear combination of the others"),
        column_(column) {}

  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

// Inference that cannot be carried out (zero standard error with nonzero
// estimate, leverage of one, ...).
class DegenerateInferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A traced process disappeared between samples.
class ProcessGoneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace antipower
