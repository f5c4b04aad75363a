#pragma once

#include <map>
#include <regex>
#include <set>
#include <string>

#include "gctune/evaluator.hpp"
#include "gctune/space.hpp"

namespace gctune {

struct CommandResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string output;  // stdout and stderr, interleaved
};

// Runs `command` through /bin/sh, killing its process group after
// `timeout_seconds` (<= 0: no limit).
CommandResult run_command(const std::string& command, double timeout_seconds);

// Names used as `{name}` placeholders in a command template.
std::set<std::string> template_placeholders(const std::string& tmpl);
// Substitutes every `{name}`; throws UsageError on an unknown name.
std::string render_template(const std::string& tmpl, const std::map<std::string, std::string>& values);

struct ShellEvaluatorOptions {
  std::string command_template;
  // Regular expression with exactly one capture group holding the objective.
  std::string pattern = R"(([-+0-9.eE]+))";
  double timeout_seconds = 600.0;
  // The first run warms up; the objective is the mean of the remaining runs.
  int repeats = 3;
};

// Runs a benchmark command per configuration. Placeholders must name every
// tunable; the task feature placeholder is optional. Non-zero exit status,
// timeout, or no pattern match is a failed evaluation.
class ShellEvaluator : public Evaluator {
 public:
  ShellEvaluator(const ParameterSpace& space, ShellEvaluatorOptions opts);

  EvalOutcome evaluate(const Configuration& config, double task_value) override;
  std::string describe() const override { return "shell:" + opts_.command_template; }

  std::string command_for(const Configuration& config, double task_value) const;

 private:
  ParameterSpace space_;
  ShellEvaluatorOptions opts_;
  std::regex pattern_;
};

}  // namespace gctune
