#include "gctune/tuner.hpp"

#include <algorithm>
#include <chrono>

#include "gctune/error.hpp"

namespace gctune {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::uint64_t sampler_seed(std::uint64_t seed) { return seed ^ 0x5851f42d4c957f2dULL; }

void check_options(const TuneOptions& opts) {
  if (opts.budget == 0) throw UsageError("budget must be at least 1");
}

// Evaluates `batch` in order and fills the report rows.
void run_evaluations(TuneReport& report, const SampleBatch& batch, Evaluator& evaluator, Clock::time_point t0) {
  report.saturated = batch.saturated;
  report.generated = batch.generated;
  report.rejected_repeated = batch.rejected_repeated;
  std::optional<double> best;
  for (const auto& config : batch.configs) {
    TuneRow row{report.rows.size() + 1, config, std::nullopt, {}, std::nullopt, 0.0};
    EvalOutcome outcome;
    try {
      outcome = evaluator.evaluate(config, report.target);
    } catch (const std::exception& e) {
      outcome = EvalOutcome::failed(e.what());
    }
    row.objective = outcome.objective;
    row.error = outcome.error;
    if (row.objective && (!best || *row.objective < *best)) best = row.objective;
    row.best_so_far = best;
    row.elapsed_seconds = seconds_since(t0);
    report.rows.push_back(std::move(row));
  }
  if (!report.rows.empty() && !best) throw EvaluatorError("every evaluation failed (" + evaluator.describe() + ")");
}

TuneReport new_report(std::string strategy, const TuneOptions& opts) {
  TuneReport r;
  r.strategy = std::move(strategy);
  r.target = opts.target;
  r.budget = opts.budget;
  r.seed = opts.seed;
  return r;
}

}  // namespace

std::optional<std::size_t> TuneReport::best_row() const {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].objective && (!best || *rows[i].objective < *rows[*best].objective)) best = i;
  return best;
}

std::optional<double> TuneReport::best_objective() const {
  auto i = best_row();
  if (!i) return std::nullopt;
  return rows[*i].objective;
}

std::optional<std::size_t> TuneReport::best_index() const {
  auto i = best_row();
  if (!i) return std::nullopt;
  return rows[*i].index;
}

TuneReport tune(const Dataset& source, const TuneOptions& opts, Evaluator& evaluator) {
  check_options(opts);
  if (source.task_values().size() < 2) throw DataError("source data must span at least 2 task values");
  const auto t0 = Clock::now();
  Dataset filtered = quantile_filter(source, opts.quantile);
  CopulaModel model = CopulaModel::fit(filtered, opts.seed, opts.quantile);
  TuneReport report = new_report("gc", opts);
  SampleBatch batch = sample(model, opts.target, opts.budget, sampler_seed(opts.seed), {opts.already_evaluated, 0});
  report.sampling_seconds = seconds_since(t0);
  run_evaluations(report, batch, evaluator, t0);
  return report;
}

TuneReport tune(const CopulaModel& model, const TuneOptions& opts, Evaluator& evaluator) {
  check_options(opts);
  const auto t0 = Clock::now();
  TuneReport report = new_report("gc", opts);
  SampleBatch batch = sample(model, opts.target, opts.budget, sampler_seed(opts.seed), {opts.already_evaluated, 0});
  report.sampling_seconds = seconds_since(t0);
  run_evaluations(report, batch, evaluator, t0);
  return report;
}

TuneReport tune_random(const ParameterSpace& space, const TuneOptions& opts, Evaluator& evaluator) {
  check_options(opts);
  const auto t0 = Clock::now();
  TuneReport report = new_report("random", opts);
  SampleBatch batch = random_batch(space, opts.budget, sampler_seed(opts.seed), {opts.already_evaluated, 0});
  report.sampling_seconds = seconds_since(t0);
  run_evaluations(report, batch, evaluator, t0);
  return report;
}

double speedup(const TuneReport& report, double baseline_objective) {
  if (!(baseline_objective > 0.0)) throw UsageError("baseline objective must be positive");
  auto best = report.best_objective();
  if (!best || !(*best > 0.0)) throw UsageError("report has no positive best objective");
  return baseline_objective / *best;
}

LatencyProbe latency_probe(const std::function<SampleBatch(std::size_t)>& sampler, std::size_t n) {
  const auto t0 = Clock::now();
  SampleBatch batch = sampler(n);
  return {seconds_since(t0), std::move(batch)};
}

void write_report_csv(std::ostream& out, const TuneReport& report, const ParameterSpace& space) {
  out << "index";
  for (const auto& p : space.params()) out << ',' << p.name();
  out << ",objective,best_so_far,status\n";
  for (const auto& row : report.rows) {
    out << row.index;
    for (const auto& v : row.config.values()) out << ',' << to_string(v);
    out << ',' << (row.objective ? to_string(Value{*row.objective}) : "");
    out << ',' << (row.best_so_far ? to_string(Value{*row.best_so_far}) : "");
    out << ',' << (row.objective ? "ok" : "failed") << '\n';
  }
}

nlohmann::json report_summary(const TuneReport& report, const ParameterSpace& space) {
  nlohmann::json j;
  j["strategy"] = report.strategy;
  j["target"] = report.target;
  j["budget"] = report.budget;
  j["seed"] = report.seed;
  j["evaluations"] = report.rows.size();
  j["failed"] = std::count_if(report.rows.begin(), report.rows.end(), [](const auto& r) { return !r.objective; });
  j["saturated"] = report.saturated;
  j["generated"] = report.generated;
  j["rejected_repeated"] = report.rejected_repeated;
  j["sampling_seconds"] = report.sampling_seconds;
  j["elapsed_seconds"] = nlohmann::json::array();
  for (const auto& r : report.rows) j["elapsed_seconds"].push_back(r.elapsed_seconds);
  if (auto i = report.best_row()) {
    j["best_objective"] = *report.rows[*i].objective;
    j["best_index"] = report.rows[*i].index;
    j["best_config"] = space.serialize(report.rows[*i].config);
  }
  for (const auto& r : report.rows)
    if (!r.objective) j["errors"].push_back({{"index", r.index}, {"error", r.error}});
  return j;
}

}  // namespace gctune
