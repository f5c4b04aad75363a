#pragma once

#include <optional>
#include <string>

#include "gctune/space.hpp"

namespace gctune {

// Result of one objective measurement. A missing objective is a failure and
// `error` says why.
struct EvalOutcome {
  std::optional<double> objective;
  std::string error;

  static EvalOutcome ok(double v) { return {v, {}}; }
  static EvalOutcome failed(std::string why) { return {std::nullopt, std::move(why)}; }
};

// f(config; task). Lower is better. Called from the tuning loop thread only.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual EvalOutcome evaluate(const Configuration& config, double task_value) = 0;
  virtual std::string describe() const = 0;
};

}  // namespace gctune
