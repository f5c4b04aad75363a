#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gctune {

// Base for every error the library raises on purpose. The CLI maps the
// concrete subclasses onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad flags, bad knob values, violated preconditions on caller input.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed files, schema violations, records outside their domain.
class DataError : public Error {
 public:
  using Error::Error;
};

// A value failed validation against a ParameterSpace. Carries one line per
// offending field.
class ValidationError : public DataError {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : DataError(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out;
    for (const auto& s : issues) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> issues_;
};

// Fewer than two observations for a numeric marginal.
class DegenerateMarginalError : public DataError {
 public:
  using DataError::DataError;
};

// Every evaluation of a tuning run failed, or an evaluator could not run.
class EvaluatorError : public Error {
 public:
  using Error::Error;
};

}  // namespace gctune
