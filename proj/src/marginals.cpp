#include "gctune/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gctune/error.hpp"
#include "gctune/normal.hpp"

namespace gctune {

namespace {

// Standard normal mass on [a, b], evaluated on whichever tail keeps precision.
double normal_mass(double a, double b) {
  if (b <= a) return 0.0;
  if (a >= 0.0) return normal_sf(a) - normal_sf(b);
  if (b <= 0.0) return normal_cdf(b) - normal_cdf(a);
  return 1.0 - normal_cdf(a) - normal_sf(b);
}

double clamp_latent(double z) {
  if (std::isnan(z)) return 0.0;
  return std::clamp(z, -kLatentClamp, kLatentClamp);
}

// Latent for a point whose lower-tail mass is `below` and upper-tail mass is
// `above` (below + above == 1 up to rounding).
double latent_from_tails(double below, double above) {
  return clamp_latent(below < above ? normal_quantile(below) : -normal_quantile(above));
}

void finish_layout(CategoricalMarginal& m) {
  m.lower.assign(m.widths.size(), 0.0);
  double acc = 0.0;
  for (auto i : m.order) {
    m.lower[i] = acc;
    acc += m.widths[i];
  }
}

}  // namespace

double NumericMarginal::cdf(double x) const {
  const double a = (lo - mean) / stddev, b = (hi - mean) / stddev, t = (x - mean) / stddev;
  const double z = normal_mass(a, b);
  return std::clamp(normal_mass(a, t) / z, 0.0, 1.0);
}

double NumericMarginal::sf(double x) const {
  const double a = (lo - mean) / stddev, b = (hi - mean) / stddev, t = (x - mean) / stddev;
  const double z = normal_mass(a, b);
  return std::clamp(normal_mass(t, b) / z, 0.0, 1.0);
}

double NumericMarginal::quantile_of_latent(double latent) const {
  const double a = (lo - mean) / stddev, b = (hi - mean) / stddev;
  const double z = normal_mass(a, b);
  latent = clamp_latent(latent);
  double t;
  if (latent <= 0.0) {
    const double target = normal_cdf(latent) * z;  // mass on [a, t]
    t = a <= 0.0 ? normal_quantile(normal_cdf(a) + target) : -normal_quantile(normal_sf(a) - target);
  } else {
    const double target = normal_sf(latent) * z;  // mass on [t, b]
    t = b >= 0.0 ? -normal_quantile(normal_sf(b) + target) : normal_quantile(normal_cdf(b) - target);
  }
  double x = mean + stddev * t;
  if (std::isnan(x)) x = latent <= 0.0 ? lo : hi;
  return std::clamp(x, lo, hi);
}

double NumericMarginal::snap(double x) const {
  x = std::clamp(x, lo, hi);
  if (step <= 0.0) return x;
  const auto last = std::llround((hi - lo) / step);
  const auto i = std::clamp<long long>(std::llround((x - lo) / step), 0, last);
  return i == last ? hi : lo + static_cast<double>(i) * step;
}

std::size_t CategoricalMarginal::option_at(double u) const {
  for (auto i : order)
    if (u < upper(i)) return i;
  return order.back();
}

double MarginalTransform::forward(double value, Encode mode, Rng* rng) const {
  if (const auto* m = std::get_if<NumericMarginal>(&m_)) {
    if (!(value >= m->lo && value <= m->hi))
      throw DataError("column '" + column_ + "': value " + std::to_string(value) + " outside domain");
    return latent_from_tails(m->cdf(value), m->sf(value));
  }
  const auto& m = std::get<CategoricalMarginal>(m_);
  const auto option = static_cast<std::size_t>(std::llround(value));
  if (!(value >= 0.0) || option >= m.widths.size() || static_cast<double>(option) != value)
    throw DataError("column '" + column_ + "': category index " + std::to_string(value) + " outside domain");
  double offset = 0.5 * m.widths[option];
  if (mode == Encode::Stochastic) offset = m.widths[option] * rng->uniform_open();
  const double below = m.lower[option] + offset;
  // Mass above the point, summed from the top so narrow trailing intervals survive.
  double above = m.widths[option] - offset;
  bool after = false;
  for (auto i : m.order) {
    if (after) above += m.widths[i];
    if (i == option) after = true;
  }
  return latent_from_tails(below, above);
}

double MarginalTransform::inverse(double latent) const {
  latent = clamp_latent(latent);
  if (const auto* m = std::get_if<NumericMarginal>(&m_)) return m->snap(m->quantile_of_latent(latent));
  const auto& m = std::get<CategoricalMarginal>(m_);
  if (latent <= 0.0) return static_cast<double>(m.option_at(normal_cdf(latent)));
  // Walk from the top using upper-tail mass.
  double above = normal_sf(latent);
  double acc = 0.0;
  for (auto it = m.order.rbegin(); it != m.order.rend(); ++it) {
    acc += m.widths[*it];
    if (above <= acc) return static_cast<double>(*it);
  }
  return static_cast<double>(m.order.front());
}

nlohmann::json MarginalTransform::to_json() const {
  nlohmann::json j;
  j["column"] = column_;
  if (const auto* m = std::get_if<NumericMarginal>(&m_)) {
    j["kind"] = "numeric";
    j["mean"] = m->mean;
    j["stddev"] = m->stddev;
    j["lo"] = m->lo;
    j["hi"] = m->hi;
    j["step"] = m->step;
  } else {
    const auto& c = std::get<CategoricalMarginal>(m_);
    j["kind"] = "categorical";
    j["order"] = c.order;
    j["widths"] = c.widths;
  }
  return j;
}

MarginalTransform MarginalTransform::from_json(const nlohmann::json& j) {
  try {
    auto column = j.at("column").get<std::string>();
    if (j.at("kind") == "numeric") {
      NumericMarginal m{j.at("mean").get<double>(), j.at("stddev").get<double>(), j.at("lo").get<double>(),
                        j.at("hi").get<double>(), j.at("step").get<double>()};
      if (!(m.stddev > 0.0) || !(m.lo < m.hi)) throw DataError("column '" + column + "': bad numeric marginal");
      return {std::move(column), m};
    }
    CategoricalMarginal m;
    m.order = j.at("order").get<std::vector<std::size_t>>();
    m.widths = j.at("widths").get<std::vector<double>>();
    std::vector<std::size_t> sorted = m.order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted[i] != i) throw DataError("column '" + column + "': category order is not a permutation");
    if (m.order.size() != m.widths.size() || m.order.empty())
      throw DataError("column '" + column + "': bad categorical marginal");
    finish_layout(m);
    return {std::move(column), std::move(m)};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed marginal: ") + e.what());
  }
}

NumericMarginal fit_numeric(std::span<const double> values, double lo, double hi, double step) {
  if (values.size() < 2) throw DegenerateMarginalError("numeric marginal needs at least 2 values");
  if (!(lo < hi)) throw DataError("numeric marginal needs lo < hi");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, std::max(sd, kStdFloor * (hi - lo)), lo, hi, step};
}

CategoricalMarginal fit_categorical(std::span<const std::size_t> values, std::size_t option_count) {
  if (values.empty()) throw DegenerateMarginalError("categorical marginal needs at least 1 value");
  std::vector<double> counts(option_count, kCategorySmoothing);
  for (auto v : values) {
    if (v >= option_count) throw DataError("category index outside schema");
    counts[v] += 1.0;
  }
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  CategoricalMarginal m;
  m.order.resize(option_count);
  std::iota(m.order.begin(), m.order.end(), std::size_t{0});
  std::stable_sort(m.order.begin(), m.order.end(), [&](auto a, auto b) { return counts[a] > counts[b]; });
  m.widths.resize(option_count);
  for (std::size_t i = 0; i < option_count; ++i) m.widths[i] = counts[i] / total;
  finish_layout(m);
  return m;
}

}  // namespace gctune
