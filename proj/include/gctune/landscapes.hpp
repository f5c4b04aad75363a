#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "gctune/dataset.hpp"
#include "gctune/evaluator.hpp"
#include "gctune/space.hpp"

namespace gctune {

// Analytic stand-in for a tuned kernel: a pure objective over (config, task)
// with three source tasks and three targets (two interpolating, one
// extrapolating).
class Landscape {
 public:
  using Objective = std::function<double(const ParameterSpace&, const Configuration&, double)>;

  Landscape(std::string name, std::string description, ParameterSpace space, Objective objective,
            Configuration default_config);

  const std::string& name() const { return name_; }
  const std::string& description() const { return description_; }
  const ParameterSpace& space() const { return space_; }
  const Configuration& default_config() const { return default_; }
  double objective(const Configuration& c, double task_value) const { return objective_(space_, c, task_value); }

  static constexpr double kSourceTasks[3] = {400.0, 800.0, 1200.0};
  // Small-medium, medium-large, extra-large.
  static constexpr double kTargetTasks[3] = {600.0, 1000.0, 1600.0};

 private:
  std::string name_;
  std::string description_;
  ParameterSpace space_;
  Objective objective_;
  Configuration default_;
};

std::vector<std::string> landscape_names();
// Throws UsageError listing the available names.
Landscape make_landscape(std::string_view name);

// `per_task` distinct configurations per source task, collected the way a
// prior tuning campaign would: a uniform warm-up, then mostly local moves
// around the best points found so far.
Dataset generate_source_data(const Landscape& landscape, std::size_t per_task, std::uint64_t seed);

// Objectives of every configuration for one task, in enumeration order.
std::vector<double> exhaustive_objectives(const Landscape& landscape, double task_value);

class SyntheticEvaluator : public Evaluator {
 public:
  explicit SyntheticEvaluator(const Landscape& landscape) : landscape_(&landscape) {}

  EvalOutcome evaluate(const Configuration& config, double task_value) override {
    return EvalOutcome::ok(landscape_->objective(config, task_value));
  }
  std::string describe() const override { return "synthetic:" + landscape_->name(); }

 private:
  const Landscape* landscape_;
};

}  // namespace gctune
