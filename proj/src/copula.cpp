#include "gctune/copula.hpp"

#include <cmath>
#include <fstream>

#include "gctune/error.hpp"
#include "gctune/linalg.hpp"

namespace gctune {

namespace {

MarginalTransform fit_column(const ParameterDef& p, const std::vector<double>& values) {
  if (p.kind() == Kind::Categorical) {
    std::vector<std::size_t> idx(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) idx[i] = static_cast<std::size_t>(values[i]);
    return {p.name(), fit_categorical(idx, p.option_count())};
  }
  return {p.name(), fit_numeric(values, p.lo(), p.hi(), p.step())};
}

}  // namespace

CopulaModel::CopulaModel(ParameterSpace space, std::vector<MarginalTransform> transforms, Eigen::MatrixXd corr,
                         std::size_t fitted_rows, double quantile, std::uint64_t seed,
                         std::vector<double> task_values, std::vector<std::string> warnings)
    : space_(std::move(space)),
      transforms_(std::move(transforms)),
      corr_(std::move(corr)),
      fitted_rows_(fitted_rows),
      quantile_(quantile),
      seed_(seed),
      task_values_(std::move(task_values)),
      warnings_(std::move(warnings)) {
  const auto d = static_cast<Eigen::Index>(space_.size() + 1);
  if (static_cast<Eigen::Index>(transforms_.size()) != d || corr_.rows() != d || corr_.cols() != d)
    throw DataError("copula model dimensions do not match the space");
  for (std::size_t j = 0; j < space_.size(); ++j) {
    if (transforms_[j].column() != space_.params()[j].name())
      throw DataError("copula column order does not match the space");
    if (transforms_[j].is_categorical() != (space_.params()[j].kind() == Kind::Categorical))
      throw DataError("column '" + transforms_[j].column() + "': marginal kind does not match the space");
  }
  if (transforms_.back().column() != space_.task_feature().name() || transforms_.back().is_categorical())
    throw DataError("last copula column must be the numeric task feature");
  if (!is_symmetric(corr_, 1e-12)) throw DataError("correlation matrix is not symmetric");
  raw_min_eig_ = min_eigenvalue(corr_);
  // Stored matrices were repaired at fit time; only gross violations are fixed here.
  if (raw_min_eig_ < -1e-9) corr_ = repair_correlation(corr_);
}

CopulaModel CopulaModel::fit(const Dataset& ds, std::uint64_t seed, double quantile_used) {
  if (ds.size() < 2) throw DataError("copula fit needs at least 2 records");
  const auto& space = ds.space();
  const std::size_t d = space.size() + 1;
  const auto& recs = ds.records();

  std::vector<std::vector<double>> columns(d, std::vector<double>(recs.size()));
  for (std::size_t i = 0; i < recs.size(); ++i) {
    for (std::size_t j = 0; j < space.size(); ++j) columns[j][i] = space.params()[j].numeric(recs[i].config[j]);
    columns[d - 1][i] = recs[i].task_value;
  }

  std::vector<MarginalTransform> transforms;
  for (std::size_t j = 0; j < space.size(); ++j) transforms.push_back(fit_column(space.params()[j], columns[j]));
  transforms.push_back(fit_column(space.task_feature(), columns[d - 1]));

  std::vector<std::string> warnings;
  auto tasks = ds.task_values();
  if (tasks.size() < 2)
    warnings.push_back("fitted on a single task value; conditioning on the task has no effect");

  Rng rng(seed);
  Eigen::MatrixXd latents(static_cast<Eigen::Index>(recs.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < recs.size(); ++i)
    for (std::size_t j = 0; j < d; ++j)
      latents(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          transforms[j].forward(columns[j][i], Encode::Stochastic, &rng);

  Eigen::MatrixXd corr = pearson_correlation(latents);
  const double raw_min = min_eigenvalue(corr);
  if (raw_min < 0.0) corr = repair_correlation(corr);
  CopulaModel model(space, std::move(transforms), std::move(corr), recs.size(), quantile_used, seed, std::move(tasks),
                    std::move(warnings));
  model.raw_min_eig_ = raw_min;
  return model;
}

nlohmann::json CopulaModel::to_json() const {
  nlohmann::json j;
  j["format"] = "gctune-copula";
  j["version"] = kModelFormatVersion;
  j["schema_fingerprint"] = space_.fingerprint();
  j["space"] = space_.to_json();
  j["columns"] = nlohmann::json::array();
  j["marginals"] = nlohmann::json::array();
  for (const auto& t : transforms_) {
    j["columns"].push_back(t.column());
    j["marginals"].push_back(t.to_json());
  }
  std::vector<double> flat;
  for (Eigen::Index r = 0; r < corr_.rows(); ++r)
    for (Eigen::Index c = 0; c < corr_.cols(); ++c) flat.push_back(corr_(r, c));
  j["correlation"] = {{"rows", corr_.rows()}, {"cols", corr_.cols()}, {"row_major", flat}};
  j["fit"] = {{"rows", fitted_rows_}, {"quantile", quantile_}, {"seed", seed_}, {"task_values", task_values_}};
  j["warnings"] = warnings_;
  return j;
}

CopulaModel CopulaModel::from_json(const nlohmann::json& j) {
  try {
    if (!j.contains("version")) throw DataError("model file has no version field");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw DataError("unsupported model version " + j.at("version").dump());
    auto space = ParameterSpace::from_json(j.at("space"));
    if (j.at("schema_fingerprint").get<std::string>() != space.fingerprint())
      throw DataError("model schema fingerprint does not match its embedded space");
    std::vector<MarginalTransform> transforms;
    for (const auto& m : j.at("marginals")) transforms.push_back(MarginalTransform::from_json(m));
    const auto rows = j.at("correlation").at("rows").get<Eigen::Index>();
    const auto cols = j.at("correlation").at("cols").get<Eigen::Index>();
    const auto flat = j.at("correlation").at("row_major").get<std::vector<double>>();
    if (rows != cols || static_cast<Eigen::Index>(flat.size()) != rows * cols)
      throw DataError("correlation matrix has inconsistent shape");
    Eigen::MatrixXd corr(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) corr(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    const auto& fit = j.at("fit");
    return CopulaModel(std::move(space), std::move(transforms), std::move(corr), fit.at("rows").get<std::size_t>(),
                       fit.at("quantile").get<double>(), fit.at("seed").get<std::uint64_t>(),
                       fit.at("task_values").get<std::vector<double>>(),
                       j.at("warnings").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

void CopulaModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file '" + path + "'");
  out << to_json().dump(2) << '\n';
}

CopulaModel CopulaModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file '" + path + "': " + e.what());
  }
  return from_json(j);
}

ConditionalLatent conditional_latent(const CopulaModel& model, double task_value) {
  const auto& task = model.space().task_feature();
  if (!task.contains(task_value))
    throw UsageError("task value " + std::to_string(task_value) + " outside the task feature domain");
  const double zc = model.task_transform().forward(task_value, Encode::Midpoint);
  const auto c = static_cast<Eigen::Index>(model.dimension() - 1);
  auto cond = condition_on(model.correlation(), c, zc);
  return {std::move(cond.mean), std::move(cond.cov), zc, cond.independent};
}

ConditionalSampler::ConditionalSampler(const CopulaModel& model, double task_value)
    : model_(&model), latent_(conditional_latent(model, task_value)), factor_(psd_factor(latent_.cov)) {}

Configuration ConditionalSampler::draw(Rng& rng) const {
  const auto& space = model_->space();
  Eigen::VectorXd noise(factor_.cols());
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise(i) = rng.normal();
  Eigen::VectorXd z = latent_.mean + factor_ * noise;
  std::vector<Value> values;
  values.reserve(space.size());
  for (std::size_t j = 0; j < space.size(); ++j) {
    const double x = model_->transforms()[j].inverse(z(static_cast<Eigen::Index>(j)));
    values.push_back(space.params()[j].from_numeric(x));
  }
  return Configuration(std::move(values));
}

namespace {

template <typename Draw>
SampleBatch collect_unique(std::size_t n, const SampleOptions& opts, Draw&& draw) {
  if (n == 0) throw UsageError("sample count must be at least 1");
  const std::size_t cap = opts.attempt_cap ? opts.attempt_cap : 100 * n;
  SampleBatch batch;
  ConfigurationSet seen;
  while (batch.configs.size() < n && batch.generated < cap) {
    Configuration c = draw();
    ++batch.generated;
    if ((opts.exclude && opts.exclude->count(c)) || !seen.insert(c).second) {
      ++batch.rejected_repeated;
      continue;
    }
    batch.configs.push_back(std::move(c));
  }
  batch.saturated = batch.configs.size() < n;
  return batch;
}

}  // namespace

SampleBatch sample(const CopulaModel& model, double task_value, std::size_t n, std::uint64_t seed,
                   const SampleOptions& opts) {
  ConditionalSampler sampler(model, task_value);
  Rng rng(seed);
  return collect_unique(n, opts, [&] { return sampler.draw(rng); });
}

SampleBatch random_batch(const ParameterSpace& space, std::size_t n, std::uint64_t seed, const SampleOptions& opts) {
  Rng rng(seed);
  std::vector<std::uint64_t> idx(space.size());
  return collect_unique(n, opts, [&] {
    for (std::size_t j = 0; j < space.size(); ++j) idx[j] = rng.below(space.params()[j].option_count());
    return space.from_indices(idx);
  });
}

double chao1(const std::vector<std::size_t>& counts) {
  double distinct = 0.0, singletons = 0.0, doubletons = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    distinct += 1.0;
    if (c == 1) singletons += 1.0;
    if (c == 2) doubletons += 1.0;
  }
  return distinct + singletons * singletons / (2.0 * doubletons + 1.0);
}

double estimate_unique(const CopulaModel& model, double task_value, std::size_t trials, std::uint64_t seed) {
  if (trials < 1000) throw UsageError("estimate_unique needs at least 1000 trials");
  ConditionalSampler sampler(model, task_value);
  Rng rng(seed);
  std::unordered_map<Configuration, std::size_t, ConfigurationHash> freq;
  for (std::size_t t = 0; t < trials; ++t) ++freq[sampler.draw(rng)];
  std::vector<std::size_t> counts;
  counts.reserve(freq.size());
  for (const auto& [cfg, c] : freq) counts.push_back(c);
  return chao1(counts);
}

}  // namespace gctune
