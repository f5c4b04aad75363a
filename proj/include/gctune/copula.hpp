#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gctune/dataset.hpp"
#include "gctune/marginals.hpp"
#include "gctune/rng.hpp"
#include "gctune/space.hpp"

namespace gctune {

using ConfigurationSet = std::unordered_set<Configuration, ConfigurationHash>;

inline constexpr int kModelFormatVersion = 1;

// Gaussian copula over the tunables followed by the task feature. The
// objective column is not modelled; filtering already encodes performance.
class CopulaModel {
 public:
  // Fits marginals, encodes every row (stochastic categorical encode drawn
  // from `seed`) and takes the Pearson correlation of the latents, repaired to
  // a PSD unit-diagonal matrix. Needs at least 2 records; fewer than 2
  // distinct task values only adds a warning.
  static CopulaModel fit(const Dataset& ds, std::uint64_t seed, double quantile_used = 1.0);

  const ParameterSpace& space() const { return space_; }
  const std::vector<MarginalTransform>& transforms() const { return transforms_; }
  const MarginalTransform& task_transform() const { return transforms_.back(); }
  const Eigen::MatrixXd& correlation() const { return corr_; }
  // Smallest eigenvalue of the correlation before PSD repair.
  double raw_min_eigenvalue() const { return raw_min_eig_; }
  std::size_t fitted_rows() const { return fitted_rows_; }
  double quantile() const { return quantile_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& task_values() const { return task_values_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::size_t dimension() const { return transforms_.size(); }

  nlohmann::json to_json() const;
  static CopulaModel from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static CopulaModel load(const std::string& path);

  friend bool operator==(const CopulaModel& a, const CopulaModel& b) { return a.to_json() == b.to_json(); }

  // Assembles a model from parts; used by deserialization and tests.
  CopulaModel(ParameterSpace space, std::vector<MarginalTransform> transforms, Eigen::MatrixXd corr,
              std::size_t fitted_rows, double quantile, std::uint64_t seed, std::vector<double> task_values,
              std::vector<std::string> warnings);

 private:
  ParameterSpace space_;
  std::vector<MarginalTransform> transforms_;
  Eigen::MatrixXd corr_;
  double raw_min_eig_ = 0.0;
  std::size_t fitted_rows_;
  double quantile_;
  std::uint64_t seed_;
  std::vector<double> task_values_;
  std::vector<std::string> warnings_;
};

// Distribution of the tunable latents given the task feature.
struct ConditionalLatent {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double task_latent;
  // Task column carried no variance; sampling ignores the condition.
  bool condition_independent;
};

// Throws UsageError if `task_value` lies outside the task feature domain.
ConditionalLatent conditional_latent(const CopulaModel& model, double task_value);

// Draws raw (possibly repeated) configurations from a conditioned model.
class ConditionalSampler {
 public:
  ConditionalSampler(const CopulaModel& model, double task_value);

  Configuration draw(Rng& rng) const;
  const ConditionalLatent& latent() const { return latent_; }

 private:
  const CopulaModel* model_;
  ConditionalLatent latent_;
  Eigen::MatrixXd factor_;
};

struct SampleBatch {
  std::vector<Configuration> configs;
  std::size_t generated = 0;
  std::size_t rejected_repeated = 0;
  // Attempt cap reached before `n` unique configurations were found.
  bool saturated = false;
};

struct SampleOptions {
  // Configurations that count as already seen.
  const ConfigurationSet* exclude = nullptr;
  // 0 means 100 * n.
  std::size_t attempt_cap = 0;
};

SampleBatch sample(const CopulaModel& model, double task_value, std::size_t n, std::uint64_t seed,
                   const SampleOptions& opts = {});

// Uniform i.i.d. baseline over the whole space with the same dedup contract.
SampleBatch random_batch(const ParameterSpace& space, std::size_t n, std::uint64_t seed,
                         const SampleOptions& opts = {});

// d + s1^2 / (2 s2 + 1) from per-item occurrence counts.
double chao1(const std::vector<std::size_t>& counts);

// Chao1 estimate of the number of distinct configurations the conditioned
// model generates, from `trials` raw draws (at least 1000).
double estimate_unique(const CopulaModel& model, double task_value, std::size_t trials, std::uint64_t seed);

}  // namespace gctune
