#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gctune/copula.hpp"
#include "gctune/dataset.hpp"
#include "gctune/evaluator.hpp"

namespace gctune {

struct TuneRow {
  std::size_t index;  // 1-based evaluation number
  Configuration config;
  std::optional<double> objective;
  std::string error;
  std::optional<double> best_so_far;
  double elapsed_seconds;  // since the start of the run
};

struct TuneReport {
  std::string strategy;  // "gc" or "random"
  double target = 0.0;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  std::vector<TuneRow> rows;
  bool saturated = false;
  std::size_t generated = 0;
  std::size_t rejected_repeated = 0;
  double sampling_seconds = 0.0;

  std::optional<std::size_t> best_row() const;
  std::optional<double> best_objective() const;
  // First evaluation at which the final best was reached (1-based).
  std::optional<std::size_t> best_index() const;
};

struct TuneOptions {
  double target = 0.0;
  std::size_t budget = 30;
  double quantile = 0.30;
  std::uint64_t seed = 0;
  // Configurations already evaluated elsewhere; never proposed again.
  const ConfigurationSet* already_evaluated = nullptr;
};

// Filter -> fit -> conditional sample -> evaluate. The seed drives both the
// fit's stochastic encoding and the sampler.
TuneReport tune(const Dataset& source, const TuneOptions& opts, Evaluator& evaluator);
// Same loop with a model fitted beforehand.
TuneReport tune(const CopulaModel& model, const TuneOptions& opts, Evaluator& evaluator);
// Uniform baseline with the same dedup contract.
TuneReport tune_random(const ParameterSpace& space, const TuneOptions& opts, Evaluator& evaluator);

// baseline / best. Throws UsageError unless baseline > 0 and a best exists.
double speedup(const TuneReport& report, double baseline_objective);

struct LatencyProbe {
  double seconds;
  SampleBatch batch;
};

LatencyProbe latency_probe(const std::function<SampleBatch(std::size_t)>& sampler, std::size_t n = 1000);

// One row per evaluation: index, parameters, objective, best_so_far, status.
// Wall time is left to the summary so same-seed runs are byte-identical.
void write_report_csv(std::ostream& out, const TuneReport& report, const ParameterSpace& space);
nlohmann::json report_summary(const TuneReport& report, const ParameterSpace& space);

}  // namespace gctune
