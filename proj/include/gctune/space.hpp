#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace gctune {

struct IntegerDomain {
  std::int64_t lo;
  std::int64_t hi;  // inclusive
};

// A real interval discretized into `grid` evenly spaced points including both
// ends. grid == 0 marks a continuous interval, which is only legal for the
// task feature.
struct RealDomain {
  double lo;
  double hi;
  std::int64_t grid = 0;

  double step() const { return grid >= 2 ? (hi - lo) / static_cast<double>(grid - 1) : 0.0; }
  double point(std::int64_t i) const {
    return i == grid - 1 ? hi : lo + static_cast<double>(i) * step();
  }
};

struct CategoricalDomain {
  std::vector<std::string> values;
};

using Domain = std::variant<IntegerDomain, RealDomain, CategoricalDomain>;

// A single parameter value. Integers, gridded reals and category labels.
using Value = std::variant<std::int64_t, double, std::string>;

std::string to_string(const Value& v);

enum class Kind { Integer, Real, Categorical };

std::string_view kind_name(Kind k);

class ParameterDef {
 public:
  // Throws DataError when the domain is malformed (lo >= hi, empty or
  // duplicated category list, real grid of one point).
  ParameterDef(std::string name, Domain domain);

  const std::string& name() const { return name_; }
  const Domain& domain() const { return domain_; }
  Kind kind() const;
  bool is_numeric() const { return kind() != Kind::Categorical; }
  bool is_finite() const;

  // Numeric bounds. For categoricals these are the option index range.
  double lo() const;
  double hi() const;
  // Decoding step: 1 for integers, grid spacing for gridded reals, 0 when
  // continuous or categorical.
  double step() const;

  // Number of distinct options; 0 for a continuous real.
  std::uint64_t option_count() const;
  Value value_at(std::uint64_t index) const;
  std::optional<std::uint64_t> index_of(const Value& v) const;

  // Numeric view of a value: the number itself, or the option index for
  // categoricals.
  double numeric(const Value& v) const;
  // Inverse of numeric() for values already on the domain.
  Value from_numeric(double x) const;

  bool contains(double x) const;

  // Parses a text cell. Appends a diagnostic and returns nullopt on failure.
  std::optional<Value> parse(const std::string& text, std::vector<std::string>& issues) const;

 private:
  std::string name_;
  Domain domain_;
};

class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::vector<Value> values) : values_(std::move(values)) {}

  const std::vector<Value>& values() const { return values_; }
  const Value& operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::vector<Value> values_;
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const;
};

class ParameterSpace {
 public:
  ParameterSpace(std::vector<ParameterDef> params, ParameterDef task_feature);

  const std::vector<ParameterDef>& params() const { return params_; }
  const ParameterDef& task_feature() const { return task_; }
  std::size_t size() const { return params_.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  // |C|. Throws DataError if the product exceeds 2^64 - 1.
  std::uint64_t cardinality() const;

  // Visits every configuration once in lexicographic schema order (last
  // parameter varies fastest). Throws UsageError naming |C| when it exceeds
  // `cap`.
  void enumerate(std::uint64_t cap, const std::function<void(const Configuration&)>& visit) const;
  std::vector<Configuration> enumerate(std::uint64_t cap) const;

  Configuration from_indices(std::span<const std::uint64_t> indices) const;
  std::vector<std::uint64_t> indices_of(const Configuration& c) const;

  // Checks a name -> text record and returns the typed configuration. Names
  // of the task feature and `objective` are ignored. Throws ValidationError
  // listing every offending field.
  Configuration validate(const std::map<std::string, std::string>& raw) const;
  std::map<std::string, std::string> serialize(const Configuration& c) const;

  bool contains(const Configuration& c) const;

  nlohmann::json to_json() const;
  static ParameterSpace from_json(const nlohmann::json& j);
  static ParameterSpace load(const std::string& path);

  // Stable 64-bit hash of the canonical schema document, hex encoded.
  std::string fingerprint() const;

  friend bool operator==(const ParameterSpace& a, const ParameterSpace& b) {
    return a.to_json() == b.to_json();
  }

 private:
  std::vector<ParameterDef> params_;
  ParameterDef task_;
};

}  // namespace gctune
