#include "gctune/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "gctune/budget.hpp"
#include "gctune/copula.hpp"
#include "gctune/dataset.hpp"
#include "gctune/error.hpp"
#include "gctune/landscapes.hpp"
#include "gctune/shell_evaluator.hpp"
#include "gctune/tuner.hpp"

namespace gctune {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kOutputDirEnv = "GCTUNE_OUTPUT_DIR";
constexpr std::size_t kEstimateTrials = 10000;

struct RunConfig {
  std::string subcommand;
  std::string space_path;
  std::vector<std::string> data_paths;
  std::string reference_path;
  std::string model_path;
  double quantile = kDefaultQuantile;
  std::optional<double> target;
  std::string budget = "30";
  std::uint64_t max_budget = 30;
  double confidence = 0.95;
  double ideal_fraction = 0.01;
  double allowance = 0.05;
  std::uint64_t seed = 0;
  std::string out_dir;
  // budget
  std::uint64_t full_space = 0;
  std::uint64_t effective_space = 0;
  std::size_t trials = kEstimateTrials;
  // sample
  std::size_t count = 1000;
  std::string strategy = "gc";
  // tune
  std::string evaluator;
  std::string command;
  std::string pattern = ShellEvaluatorOptions{}.pattern;
  int repeats = 3;
  double timeout = 600.0;
  std::optional<double> baseline;
  // simulate
  std::string landscape;
  std::size_t seeds = 3;
  std::size_t per_task = 200;

  json to_json() const {
    json j = {{"subcommand", subcommand},
              {"space", space_path},
              {"data", data_paths},
              {"reference", reference_path},
              {"model", model_path},
              {"quantile", quantile},
              {"target", target ? json(*target) : json(nullptr)},
              {"budget", budget},
              {"max_budget", max_budget},
              {"confidence", confidence},
              {"ideal_fraction", ideal_fraction},
              {"allowance", allowance},
              {"seed", seed},
              {"out", out_dir}};
    if (subcommand == "budget") {
      j["full_space"] = full_space;
      j["effective_space"] = effective_space;
      j["trials"] = trials;
    }
    if (subcommand == "sample") {
      j["n"] = count;
      j["strategy"] = strategy;
    }
    if (subcommand == "tune") {
      j["evaluator"] = evaluator;
      j["command"] = command;
      j["pattern"] = pattern;
      j["repeats"] = repeats;
      j["timeout"] = timeout;
      j["strategy"] = strategy;
      j["trials"] = trials;
      j["baseline"] = baseline ? json(*baseline) : json(nullptr);
    }
    if (subcommand == "simulate") {
      j["landscape"] = landscape;
      j["seeds"] = seeds;
      j["per_task"] = per_task;
    }
    return j;
  }
};

std::string fmt(double x, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << x;
  return s.str();
}

fs::path output_dir(const RunConfig& rc) {
  fs::path dir = rc.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv(kOutputDirEnv);
    dir = env && *env ? env : ".";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

void write_metadata(const fs::path& dir, const RunConfig& rc, const std::vector<std::string>& args, json extra = {}) {
  json j = {{"command", rc.subcommand},
            {"argv", args},
            {"knobs", rc.to_json()},
            {"seed", rc.seed},
            {"versions", {{"gctune", kVersion}, {"model_format", kModelFormatVersion}}}};
  if (!extra.is_null()) j["result"] = std::move(extra);
  write_json(dir / "metadata.json", j);
}

void check_quantile(double q, std::ostream& err) {
  if (!(q > 0.0 && q <= 1.0)) throw UsageError("--quantile must lie in (0, 1]");
  if (q < kQuantileFloor)
    err << "warning: quantile " << q << " is below the recommended floor of " << kQuantileFloor << "\n";
}

Dataset load_datasets(const ParameterSpace& space, const std::vector<std::string>& paths) {
  if (paths.empty()) throw UsageError("at least one --data file is required");
  Dataset ds = load_csv(paths.front(), space);
  for (std::size_t i = 1; i < paths.size(); ++i) ds.append(load_csv(paths[i], space));
  return ds;
}

double require_target(const RunConfig& rc) {
  if (!rc.target) throw UsageError("--target is required");
  return *rc.target;
}

json filter_report_json(const FilterReport& r) {
  return {{"quantile", r.quantile},
          {"kept", r.kept},
          {"total", r.total},
          {"coverage", r.coverage},
          {"avg_marginal_kl", r.avg_marginal_kl}};
}

json budget_json(const BudgetInputs& in, const BudgetEstimate& est) {
  json j = {{"full_space", in.full_space},
            {"effective_space", in.effective_space},
            {"ideal_fraction", in.ideal_fraction},
            {"allowance", in.pruned_optimal_allowance},
            {"confidence", in.confidence},
            {"max_budget", in.max_budget},
            {"coverage_ratio", est.coverage_ratio},
            {"defined", est.defined}};
  if (est.defined) {
    j["ideal_count"] = est.ideal_count;
    j["k_star"] = est.k_star;
    j["probability_at_k"] = est.probability_at_k;
    j["exceeds_max_budget"] = est.exceeds_max_budget;
  } else {
    j["reason"] = est.reason;
  }
  return j;
}

// ----------------------------------------------------------------------------

int cmd_fit(const RunConfig& rc, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  check_quantile(rc.quantile, err);
  auto space = ParameterSpace::load(rc.space_path);
  Dataset source = load_datasets(space, rc.data_paths);
  Dataset filtered = quantile_filter(source, rc.quantile);
  CopulaModel model = CopulaModel::fit(filtered, rc.seed, rc.quantile);
  for (const auto& w : model.warnings()) err << "warning: " << w << "\n";

  // Without an exhaustive reference the KL column measures drift from the
  // unfiltered source data.
  FilterReport report{rc.quantile, filtered.size(), source.size(), coverage(filtered),
                      avg_marginal_kl(filtered, source)};
  const auto dir = output_dir(rc);
  const auto model_path = rc.model_path.empty() ? dir / "model.json" : fs::path(rc.model_path);
  model.save(model_path.string());
  json fr = filter_report_json(report);
  fr["kl_reference"] = "unfiltered source data";
  write_json(dir / "filter_report.json", fr);
  write_metadata(dir, rc, args, {{"model", model_path.string()}, {"fitted_rows", model.fitted_rows()}});

  out << "model: " << model_path.string() << "\n"
      << "fitted_rows: " << model.fitted_rows() << " of " << source.size() << "\n"
      << "coverage: " << fmt(report.coverage) << "\n"
      << "avg_marginal_kl: " << fmt(report.avg_marginal_kl) << "\n";
  return kExitOk;
}

int cmd_sample(const RunConfig& rc, const std::vector<std::string>& args, std::ostream& out, std::ostream&) {
  if (rc.model_path.empty()) throw UsageError("--model is required");
  if (rc.count == 0) throw UsageError("--n must be at least 1");
  CopulaModel model = CopulaModel::load(rc.model_path);
  const double target = require_target(rc);
  SampleBatch batch;
  if (rc.strategy == "gc") {
    batch = sample(model, target, rc.count, rc.seed);
  } else if (rc.strategy == "random") {
    batch = random_batch(model.space(), rc.count, rc.seed);
  } else {
    throw UsageError("--strategy must be gc or random");
  }
  const auto dir = output_dir(rc);
  std::ofstream csv(dir / "samples.csv");
  for (const auto& p : model.space().params()) csv << p.name() << (&p == &model.space().params().back() ? "\n" : ",");
  for (const auto& c : batch.configs)
    for (std::size_t j = 0; j < c.size(); ++j) csv << to_string(c[j]) << (j + 1 == c.size() ? "\n" : ",");
  json acc = {{"unique", batch.configs.size()},
              {"generated", batch.generated},
              {"rejected_repeated", batch.rejected_repeated},
              {"saturated", batch.saturated}};
  write_metadata(dir, rc, args, acc);
  out << "unique: " << batch.configs.size() << "\ngenerated: " << batch.generated
      << "\nrejected_repeated: " << batch.rejected_repeated << "\nsaturated: " << std::boolalpha << batch.saturated
      << "\n";
  return kExitOk;
}

BudgetInputs budget_inputs(const RunConfig& rc) {
  BudgetInputs in;
  in.ideal_fraction = rc.ideal_fraction;
  in.pruned_optimal_allowance = rc.allowance;
  in.confidence = rc.confidence;
  in.max_budget = rc.max_budget;
  return in;
}

// |C_full| from the model's space, |C_eff| from the support estimate.
void fill_counts_from_model(BudgetInputs& in, const CopulaModel& model, double target, std::size_t trials,
                            std::uint64_t seed) {
  in.full_space = model.space().cardinality();
  const double est = estimate_unique(model, target, trials, seed);
  in.effective_space = std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::llround(est)), 1, in.full_space);
}

int cmd_budget(const RunConfig& rc, const std::vector<std::string>& args, std::ostream& out, std::ostream&) {
  BudgetInputs in = budget_inputs(rc);
  if (!rc.model_path.empty()) {
    CopulaModel model = CopulaModel::load(rc.model_path);
    fill_counts_from_model(in, model, require_target(rc), rc.trials, rc.seed);
  } else {
    if (rc.full_space == 0 || rc.effective_space == 0)
      throw UsageError("pass --model with --target, or both --full and --effective");
    in.full_space = rc.full_space;
    in.effective_space = rc.effective_space;
  }
  BudgetEstimate est = min_budget(in);
  const std::uint64_t ideal =
      est.defined ? est.ideal_count
                  : std::clamp<std::uint64_t>(
                        static_cast<std::uint64_t>(std::llround(in.ideal_fraction * static_cast<double>(in.effective_space))),
                        1, in.effective_space);
  auto curve = probability_curve(in.effective_space, ideal, in.max_budget);

  const auto dir = output_dir(rc);
  json j = budget_json(in, est);
  write_json(dir / "budget.json", j);
  std::ofstream curve_csv(dir / "curve.csv");
  curve_csv << "k,probability\n";
  for (std::size_t k = 0; k < curve.size(); ++k) curve_csv << k + 1 << ',' << to_string(Value{curve[k]}) << '\n';
  write_metadata(dir, rc, args, j);

  out << "full_space: " << in.full_space << "\neffective_space: " << in.effective_space
      << "\ncoverage_ratio: " << fmt(est.coverage_ratio) << "\nideal_count: " << ideal << "\n";
  if (est.defined) {
    out << "budget: Defined\nk_star: " << est.k_star << "\nprobability_at_k: " << fmt(est.probability_at_k, 10)
        << "\n";
    if (est.exceeds_max_budget) out << "warning: k_star exceeds max budget " << in.max_budget << "\n";
  } else {
    out << "budget: Undefined\nreason: " << est.reason << "\n";
  }
  out << "k,probability\n";
  for (std::size_t k = 0; k < curve.size(); ++k) out << k + 1 << ',' << fmt(curve[k], 10) << '\n';
  return kExitOk;
}

struct EvaluatorHandle {
  std::optional<Landscape> landscape;
  std::unique_ptr<Evaluator> evaluator;
};

EvaluatorHandle make_evaluator(const RunConfig& rc, const ParameterSpace& space) {
  if (rc.evaluator.empty()) throw UsageError("--evaluator is required (synthetic:<landscape> or shell)");
  EvaluatorHandle h;
  if (rc.evaluator.rfind("synthetic:", 0) == 0) {
    h.landscape = make_landscape(rc.evaluator.substr(10));
    if (!(h.landscape->space() == space))
      throw UsageError("landscape '" + h.landscape->name() + "' does not match the tuning space");
    h.evaluator = std::make_unique<SyntheticEvaluator>(*h.landscape);
  } else if (rc.evaluator == "shell") {
    if (rc.command.empty()) throw UsageError("--command is required with --evaluator shell");
    h.evaluator = std::make_unique<ShellEvaluator>(space, ShellEvaluatorOptions{rc.command, rc.pattern, rc.timeout,
                                                                                 rc.repeats});
  } else {
    throw UsageError("unknown evaluator '" + rc.evaluator + "'");
  }
  return h;
}

int cmd_tune(const RunConfig& rc, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const double target = require_target(rc);
  if (rc.strategy != "gc" && rc.strategy != "random") throw UsageError("--strategy must be gc or random");
  std::optional<CopulaModel> model;
  std::optional<ParameterSpace> space;
  std::uint64_t fit_rows = 0;
  if (!rc.model_path.empty()) {
    model = CopulaModel::load(rc.model_path);
    if (!rc.space_path.empty() && !(ParameterSpace::load(rc.space_path) == model->space()))
      throw DataError("model schema fingerprint does not match --space");
  } else {
    if (rc.space_path.empty()) throw UsageError("pass --model, or --space with --data");
    check_quantile(rc.quantile, err);
    space = ParameterSpace::load(rc.space_path);
    if (rc.strategy == "gc" || rc.budget == "auto") {
      Dataset source = load_datasets(*space, rc.data_paths);
      if (source.task_values().size() < 2) throw DataError("source data must span at least 2 task values");
      Dataset filtered = quantile_filter(source, rc.quantile);
      model = CopulaModel::fit(filtered, rc.seed, rc.quantile);
      fit_rows = filtered.size();
    }
  }
  const ParameterSpace& tuning_space = model ? model->space() : *space;
  // Build the evaluator before any sampling so usage errors surface first.
  EvaluatorHandle eval = make_evaluator(rc, tuning_space);

  json budget_meta = {{"mode", rc.budget}};
  std::size_t budget = 0;
  if (rc.budget == "auto") {
    BudgetInputs in = budget_inputs(rc);
    fill_counts_from_model(in, *model, target, rc.trials, rc.seed);
    BudgetEstimate est = min_budget(in);
    budget_meta["estimate"] = budget_json(in, est);
    if (est.defined && !est.exceeds_max_budget) {
      budget = est.k_star;
    } else {
      budget = rc.max_budget;
      err << "warning: " << (est.defined ? "predicted budget exceeds the cap" : "budget undefined (" + est.reason + ")")
          << "; using max budget " << rc.max_budget << "\n";
    }
  } else {
    try {
      std::size_t used = 0;
      long long b = std::stoll(rc.budget, &used);
      if (used != rc.budget.size() || b < 1) throw std::invalid_argument("budget");
      budget = static_cast<std::size_t>(b);
    } catch (const std::exception&) {
      throw UsageError("--budget must be a positive integer or 'auto'");
    }
  }
  budget_meta["used"] = budget;

  TuneOptions opts{target, budget, rc.quantile, rc.seed, nullptr};
  TuneReport report = rc.strategy == "gc" ? tune(*model, opts, *eval.evaluator)
                                          : tune_random(tuning_space, opts, *eval.evaluator);

  std::optional<double> baseline = rc.baseline;
  if (!baseline && eval.landscape) baseline = eval.landscape->objective(eval.landscape->default_config(), target);

  const auto dir = output_dir(rc);
  std::ofstream csv(dir / "tune.csv");
  write_report_csv(csv, report, tuning_space);
  json summary = report_summary(report, tuning_space);
  summary["budget"] = budget_meta;
  summary["evaluator"] = eval.evaluator->describe();
  if (fit_rows) summary["fitted_rows"] = fit_rows;
  if (baseline && report.best_objective()) {
    summary["baseline_objective"] = *baseline;
    summary["speedup"] = speedup(report, *baseline);
  }
  write_json(dir / "summary.json", summary);
  write_metadata(dir, rc, args, {{"budget", budget_meta}});

  out << "evaluations: " << report.rows.size() << "\n";
  if (report.saturated) out << "saturated: true\n";
  if (auto b = report.best_objective()) out << "best_objective: " << fmt(*b, 10) << "\n";
  if (summary.contains("speedup")) out << "speedup: " << fmt(summary["speedup"].get<double>()) << "\n";
  return kExitOk;
}

int cmd_analyze(const RunConfig& rc, const std::vector<std::string>& args, std::ostream& out, std::ostream&) {
  if (rc.reference_path.empty()) throw UsageError("--reference is required");
  auto space = ParameterSpace::load(rc.space_path);
  Dataset ds = load_datasets(space, rc.data_paths);
  Dataset ref = load_csv(rc.reference_path, space);
  json rows = json::array();
  const auto dir = output_dir(rc);
  std::ofstream csv(dir / "analyze.csv");
  csv << "quantile,kept,total,coverage,avg_marginal_kl\n";
  out << "quantile  kept  coverage  avg_marginal_kl\n";
  for (int level = 10; level >= 1; --level) {
    const double q = level / 10.0;
    FilterReport r = filter_report(ds, ref, q);
    rows.push_back(filter_report_json(r));
    csv << to_string(Value{q}) << ',' << r.kept << ',' << r.total << ',' << to_string(Value{r.coverage}) << ','
        << to_string(Value{r.avg_marginal_kl}) << '\n';
    out << std::setw(8) << fmt(q, 2) << std::setw(6) << r.kept << std::setw(10) << fmt(r.coverage, 4)
        << std::setw(17) << fmt(r.avg_marginal_kl, 4) << '\n';
  }
  write_json(dir / "analyze.json", {{"reports", rows}});
  write_metadata(dir, rc, args);
  return kExitOk;
}

int cmd_simulate(const RunConfig& rc, const std::vector<std::string>& args, std::ostream& out, std::ostream&) {
  Landscape land = make_landscape(rc.landscape);
  if (rc.seeds == 0) throw UsageError("--seeds must be at least 1");
  std::size_t budget = 0;
  try {
    budget = static_cast<std::size_t>(std::stoull(rc.budget));
  } catch (const std::exception&) {
    throw UsageError("--budget must be a positive integer for simulate");
  }
  if (budget == 0) throw UsageError("--budget must be at least 1");
  const double target = rc.target.value_or(Landscape::kTargetTasks[0]);
  if (!land.space().task_feature().contains(target)) throw UsageError("--target outside the task feature domain");

  auto all = exhaustive_objectives(land, target);
  std::sort(all.begin(), all.end());
  const double top10 = all[static_cast<std::size_t>(std::ceil(0.10 * static_cast<double>(all.size()))) - 1];
  const double baseline = land.objective(land.default_config(), target);

  const auto dir = output_dir(rc);
  SyntheticEvaluator evaluator(land);
  struct Totals {
    std::vector<double> first, best, best_index, speedup;
    std::size_t first_top10 = 0;
    std::vector<double> curve_sum;
  };
  std::map<std::string, Totals> totals;
  for (std::size_t s = 0; s < rc.seeds; ++s) {
    const std::uint64_t seed = rc.seed + s;
    Dataset source = generate_source_data(land, rc.per_task, seed);
    TuneOptions opts{target, budget, rc.quantile, seed, nullptr};
    for (auto report : {tune(source, opts, evaluator), tune_random(land.space(), opts, evaluator)}) {
      fs::create_directories(dir / report.strategy);
      std::ofstream csv(dir / report.strategy / ("seed_" + std::to_string(seed) + ".csv"));
      write_report_csv(csv, report, land.space());
      auto& t = totals[report.strategy];
      t.first.push_back(*report.rows.front().objective);
      t.first_top10 += *report.rows.front().objective <= top10;
      t.best.push_back(*report.best_objective());
      t.best_index.push_back(static_cast<double>(*report.best_index()));
      t.speedup.push_back(speedup(report, baseline));
      t.curve_sum.resize(budget, 0.0);
      for (std::size_t k = 0; k < budget; ++k) {
        const auto& row = report.rows[std::min(k, report.rows.size() - 1)];
        t.curve_sum[k] += *row.best_so_far;
      }
    }
  }

  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  json agg;
  std::ofstream table(dir / "aggregate.csv");
  table << "strategy,first_mean,first_top10_rate,best_mean,best_median,best_index_mean,speedup_mean\n";
  out << "landscape: " << land.name() << "  target: " << target << "  seeds: " << rc.seeds << "  budget: " << budget
      << "\n";
  out << "strategy   1st(mean)    top10@1st  budget-best(mean)  best-index(mean)  speedup(mean)\n";
  for (const auto& [name, t] : totals) {
    const double rate = static_cast<double>(t.first_top10) / static_cast<double>(rc.seeds);
    agg[name] = {{"first_mean", mean(t.first)},         {"first_top10_rate", rate},
                 {"best_mean", mean(t.best)},           {"best_median", median(t.best)},
                 {"best_index_mean", mean(t.best_index)}, {"speedup_mean", mean(t.speedup)}};
    table << name << ',' << to_string(Value{mean(t.first)}) << ',' << to_string(Value{rate}) << ','
          << to_string(Value{mean(t.best)}) << ',' << to_string(Value{median(t.best)}) << ','
          << to_string(Value{mean(t.best_index)}) << ',' << to_string(Value{mean(t.speedup)}) << '\n';
    out << std::left << std::setw(9) << name << std::right << std::setw(11) << fmt(mean(t.first), 5)
        << std::setw(13) << fmt(rate, 3) << std::setw(19) << fmt(mean(t.best), 5) << std::setw(18)
        << fmt(mean(t.best_index), 3) << std::setw(15) << fmt(mean(t.speedup), 4) << '\n';
  }
  std::ofstream curve(dir / "curve.csv");
  curve << "k,gc_mean_best,random_mean_best\n";
  for (std::size_t k = 0; k < budget; ++k)
    curve << k + 1 << ',' << to_string(Value{totals["gc"].curve_sum[k] / static_cast<double>(rc.seeds)}) << ','
          << to_string(Value{totals["random"].curve_sum[k] / static_cast<double>(rc.seeds)}) << '\n';
  agg["target"] = target;
  agg["top10_threshold"] = top10;
  agg["baseline_objective"] = baseline;
  write_json(dir / "aggregate.json", agg);
  write_metadata(dir, rc, args, agg);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  CLI::App app{"Gaussian-copula transfer-learning autotuner", "gctune"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", rc.out_dir, "Output directory (default: $GCTUNE_OUTPUT_DIR or .)");
    sub->add_option("--seed", rc.seed, "Random seed");
  };
  auto add_budget_knobs = [&](CLI::App* sub) {
    sub->add_option("--confidence", rc.confidence, "Required success probability")->capture_default_str();
    sub->add_option("--ideal-fraction", rc.ideal_fraction, "Fraction of candidates counted as ideal")
        ->capture_default_str();
    sub->add_option("--allowance", rc.allowance, "Minimum effective/full ratio for a defined budget")
        ->capture_default_str();
    sub->add_option("--max-budget", rc.max_budget, "Evaluation cap")->capture_default_str();
    sub->add_option("--trials", rc.trials, "Raw draws for the support estimate")->capture_default_str();
  };

  auto* fit = app.add_subcommand("fit", "Filter source data and fit a copula model");
  fit->add_option("--space", rc.space_path, "Space schema (JSON)")->required();
  fit->add_option("--data", rc.data_paths, "Source CSV files")->required();
  fit->add_option("--quantile", rc.quantile, "Filtering quantile")->capture_default_str();
  fit->add_option("--model", rc.model_path, "Model path (default: <out>/model.json)");
  add_common(fit);

  auto* smp = app.add_subcommand("sample", "Draw unique configurations for a task");
  smp->add_option("--model", rc.model_path, "Fitted model")->required();
  smp->add_option("--target", rc.target, "Task feature value")->required();
  smp->add_option("--n", rc.count, "Unique configurations wanted")->capture_default_str();
  smp->add_option("--strategy", rc.strategy, "gc or random")->capture_default_str();
  add_common(smp);

  auto* bud = app.add_subcommand("budget", "Few-shot evaluation budget");
  bud->add_option("--model", rc.model_path, "Fitted model (estimates the effective space)");
  bud->add_option("--target", rc.target, "Task feature value (with --model)");
  bud->add_option("--full", rc.full_space, "Full space size |C|");
  bud->add_option("--effective", rc.effective_space, "Effective space size |C_eff|");
  add_budget_knobs(bud);
  add_common(bud);

  auto* tun = app.add_subcommand("tune", "Tune a target task");
  tun->add_option("--model", rc.model_path, "Fitted model");
  tun->add_option("--space", rc.space_path, "Space schema (fit on the fly with --data)");
  tun->add_option("--data", rc.data_paths, "Source CSV files");
  tun->add_option("--quantile", rc.quantile, "Filtering quantile")->capture_default_str();
  tun->add_option("--target", rc.target, "Target task feature value")->required();
  tun->add_option("--budget", rc.budget, "Evaluations, or 'auto'")->capture_default_str();
  tun->add_option("--evaluator", rc.evaluator, "synthetic:<landscape> or shell");
  tun->add_option("--command", rc.command, "Shell command template with {name} placeholders");
  tun->add_option("--pattern", rc.pattern, "Regex with one capture group for the objective");
  tun->add_option("--repeats", rc.repeats, "Runs per evaluation; the first is discarded")->capture_default_str();
  tun->add_option("--timeout", rc.timeout, "Seconds per run")->capture_default_str();
  tun->add_option("--baseline", rc.baseline, "Baseline objective for speedup");
  tun->add_option("--strategy", rc.strategy, "gc or random")->capture_default_str();
  add_budget_knobs(tun);
  add_common(tun);

  auto* ana = app.add_subcommand("analyze", "Coverage and marginal KL across filtering quantiles");
  ana->add_option("--space", rc.space_path, "Space schema (JSON)")->required();
  ana->add_option("--data", rc.data_paths, "Dataset CSV files")->required();
  ana->add_option("--reference", rc.reference_path, "Reference CSV (e.g. top 10% of an exhaustive run)")
      ->required();
  add_common(ana);

  auto* sim = app.add_subcommand("simulate", "Copula tuning vs random baseline on a synthetic landscape");
  sim->add_option("--landscape", rc.landscape, "bowl, switch or rugged")->required();
  sim->add_option("--seeds", rc.seeds, "Number of seeds")->capture_default_str();
  sim->add_option("--budget", rc.budget, "Evaluations per run")->capture_default_str();
  sim->add_option("--target", rc.target, "Target task (default: first interpolation target)");
  sim->add_option("--quantile", rc.quantile, "Filtering quantile")->capture_default_str();
  sim->add_option("--per-task", rc.per_task, "Source evaluations per source task")->capture_default_str();
  add_common(sim);

  std::vector<std::string> argv_storage{"gctune"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (fit->parsed()) rc.subcommand = "fit";
    if (smp->parsed()) rc.subcommand = "sample";
    if (bud->parsed()) rc.subcommand = "budget";
    if (tun->parsed()) rc.subcommand = "tune";
    if (ana->parsed()) rc.subcommand = "analyze";
    if (sim->parsed()) rc.subcommand = "simulate";
    if (rc.subcommand == "fit") return cmd_fit(rc, args, out, err);
    if (rc.subcommand == "sample") return cmd_sample(rc, args, out, err);
    if (rc.subcommand == "budget") return cmd_budget(rc, args, out, err);
    if (rc.subcommand == "tune") return cmd_tune(rc, args, out, err);
    if (rc.subcommand == "analyze") return cmd_analyze(rc, args, out, err);
    return cmd_simulate(rc, args, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const EvaluatorError& e) {
    err << "evaluator error: " << e.what() << "\n";
    return kExitEvaluator;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace gctune
