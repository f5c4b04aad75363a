#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gctune/rng.hpp"

namespace gctune {

// Latents are clamped to [-kLatentClamp, kLatentClamp].
inline constexpr double kLatentClamp = 8.0;
// Pseudo-count given to every categorical option (in units of one
// observation) before widths are computed.
inline constexpr double kCategorySmoothing = 1e-3;
// Standard deviation floor, relative to the domain width.
inline constexpr double kStdFloor = 1e-6;

// Gaussian N(mean, stddev^2) truncated to [lo, hi]. Decoded values are rounded
// to multiples of `step` from lo (step 0: continuous).
struct NumericMarginal {
  double mean;
  double stddev;
  double lo;
  double hi;
  double step = 0.0;

  double cdf(double x) const;
  double sf(double x) const;
  // Value whose truncated CDF is Phi(z), before grid rounding.
  double quantile_of_latent(double z) const;
  // Rounds onto the grid and clamps into [lo, hi].
  double snap(double x) const;
};

// Categories laid out on [0, 1) in descending frequency. widths and bounds
// are indexed by schema option index.
struct CategoricalMarginal {
  std::vector<std::size_t> order;  // schema indices, most frequent first
  std::vector<double> widths;
  std::vector<double> lower;

  double upper(std::size_t option) const { return lower[option] + widths[option]; }
  std::size_t option_at(double u) const;
};

enum class Encode { Midpoint, Stochastic };

class MarginalTransform {
 public:
  MarginalTransform(std::string column, NumericMarginal m) : column_(std::move(column)), m_(m) {}
  MarginalTransform(std::string column, CategoricalMarginal m) : column_(std::move(column)), m_(std::move(m)) {}

  const std::string& column() const { return column_; }
  bool is_categorical() const { return std::holds_alternative<CategoricalMarginal>(m_); }
  const NumericMarginal& numeric() const { return std::get<NumericMarginal>(m_); }
  const CategoricalMarginal& categorical() const { return std::get<CategoricalMarginal>(m_); }

  // Raw value (number, or schema option index for categoricals) to latent.
  // Stochastic encoding draws from `rng`, which must then be non-null.
  // Throws DataError for out-of-domain values.
  double forward(double value, Encode mode = Encode::Midpoint, Rng* rng = nullptr) const;
  // Latent to raw value on the domain. Total on finite input.
  double inverse(double latent) const;

  nlohmann::json to_json() const;
  static MarginalTransform from_json(const nlohmann::json& j);

  friend bool operator==(const MarginalTransform& a, const MarginalTransform& b) {
    return a.to_json() == b.to_json();
  }

 private:
  std::string column_;
  std::variant<NumericMarginal, CategoricalMarginal> m_;
};

// Moment fit: sample mean, n-1 standard deviation floored at
// kStdFloor * (hi - lo). Throws DegenerateMarginalError below two values.
NumericMarginal fit_numeric(std::span<const double> values, double lo, double hi, double step = 0.0);

// `values` holds schema option indices in [0, option_count).
CategoricalMarginal fit_categorical(std::span<const std::size_t> values, std::size_t option_count);

}  // namespace gctune
