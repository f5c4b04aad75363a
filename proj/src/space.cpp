#include "gctune/space.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "gctune/error.hpp"

namespace gctune {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double x = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(x)) return std::nullopt;
  return x;
}

}  // namespace

std::string to_string(const Value& v) {
  return std::visit(overloaded{[](std::int64_t i) { return std::to_string(i); },
                               [](double d) { return format_double(d); },
                               [](const std::string& s) { return s; }},
                    v);
}

std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::Integer: return "integer";
    case Kind::Real: return "real";
    case Kind::Categorical: return "categorical";
  }
  return "?";
}

ParameterDef::ParameterDef(std::string name, Domain domain)
    : name_(std::move(name)), domain_(std::move(domain)) {
  if (name_.empty()) throw DataError("parameter with empty name");
  std::visit(overloaded{[&](const IntegerDomain& d) {
                          if (d.lo >= d.hi)
                            throw DataError("parameter '" + name_ + "': integer lo must be < hi");
                        },
                        [&](const RealDomain& d) {
                          if (!(std::isfinite(d.lo) && std::isfinite(d.hi)) || d.lo >= d.hi)
                            throw DataError("parameter '" + name_ + "': real lo must be < hi");
                          if (d.grid == 1 || d.grid < 0)
                            throw DataError("parameter '" + name_ + "': real grid needs at least 2 points");
                        },
                        [&](const CategoricalDomain& d) {
                          if (d.values.empty())
                            throw DataError("parameter '" + name_ + "': empty category list");
                          std::set<std::string> seen(d.values.begin(), d.values.end());
                          if (seen.size() != d.values.size())
                            throw DataError("parameter '" + name_ + "': duplicate categories");
                        }},
             domain_);
}

Kind ParameterDef::kind() const {
  return static_cast<Kind>(domain_.index());
}

bool ParameterDef::is_finite() const {
  if (const auto* r = std::get_if<RealDomain>(&domain_)) return r->grid >= 2;
  return true;
}

double ParameterDef::lo() const {
  return std::visit(overloaded{[](const IntegerDomain& d) { return static_cast<double>(d.lo); },
                               [](const RealDomain& d) { return d.lo; },
                               [](const CategoricalDomain&) { return 0.0; }},
                    domain_);
}

double ParameterDef::hi() const {
  return std::visit(overloaded{[](const IntegerDomain& d) { return static_cast<double>(d.hi); },
                               [](const RealDomain& d) { return d.hi; },
                               [](const CategoricalDomain& d) {
                                 return static_cast<double>(d.values.size() - 1);
                               }},
                    domain_);
}

double ParameterDef::step() const {
  return std::visit(overloaded{[](const IntegerDomain&) { return 1.0; },
                               [](const RealDomain& d) { return d.step(); },
                               [](const CategoricalDomain&) { return 0.0; }},
                    domain_);
}

std::uint64_t ParameterDef::option_count() const {
  return std::visit(
      overloaded{[](const IntegerDomain& d) { return static_cast<std::uint64_t>(d.hi - d.lo) + 1; },
                 [](const RealDomain& d) { return static_cast<std::uint64_t>(d.grid); },
                 [](const CategoricalDomain& d) { return static_cast<std::uint64_t>(d.values.size()); }},
      domain_);
}

Value ParameterDef::value_at(std::uint64_t index) const {
  return std::visit(overloaded{[&](const IntegerDomain& d) -> Value {
                                 return d.lo + static_cast<std::int64_t>(index);
                               },
                               [&](const RealDomain& d) -> Value {
                                 return d.point(static_cast<std::int64_t>(index));
                               },
                               [&](const CategoricalDomain& d) -> Value { return d.values.at(index); }},
                    domain_);
}

std::optional<std::uint64_t> ParameterDef::index_of(const Value& v) const {
  return std::visit(
      overloaded{[&](const IntegerDomain& d) -> std::optional<std::uint64_t> {
                   const auto* i = std::get_if<std::int64_t>(&v);
                   if (!i || *i < d.lo || *i > d.hi) return std::nullopt;
                   return static_cast<std::uint64_t>(*i - d.lo);
                 },
                 [&](const RealDomain& d) -> std::optional<std::uint64_t> {
                   const auto* x = std::get_if<double>(&v);
                   if (!x || d.grid < 2 || *x < d.lo || *x > d.hi) return std::nullopt;
                   auto i = static_cast<std::int64_t>(std::llround((*x - d.lo) / d.step()));
                   if (d.point(i) != *x) return std::nullopt;
                   return static_cast<std::uint64_t>(i);
                 },
                 [&](const CategoricalDomain& d) -> std::optional<std::uint64_t> {
                   const auto* s = std::get_if<std::string>(&v);
                   if (!s) return std::nullopt;
                   for (std::size_t i = 0; i < d.values.size(); ++i)
                     if (d.values[i] == *s) return i;
                   return std::nullopt;
                 }},
      domain_);
}

double ParameterDef::numeric(const Value& v) const {
  if (kind() == Kind::Categorical) return static_cast<double>(index_of(v).value());
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

Value ParameterDef::from_numeric(double x) const {
  return std::visit(overloaded{[&](const IntegerDomain&) -> Value { return std::llround(x); },
                               [&](const RealDomain&) -> Value { return x; },
                               [&](const CategoricalDomain& d) -> Value {
                                 return d.values.at(static_cast<std::size_t>(std::llround(x)));
                               }},
                    domain_);
}

bool ParameterDef::contains(double x) const {
  return std::isfinite(x) && x >= lo() && x <= hi();
}

std::optional<Value> ParameterDef::parse(const std::string& text, std::vector<std::string>& issues) const {
  auto fail = [&](const std::string& why) -> std::optional<Value> {
    issues.push_back("'" + name_ + "': " + why);
    return std::nullopt;
  };
  if (const auto* cat = std::get_if<CategoricalDomain>(&domain_)) {
    for (const auto& v : cat->values)
      if (v == text) return Value{v};
    return fail("unknown category '" + text + "'");
  }
  auto x = parse_double(text);
  if (!x) return fail("not a number: '" + text + "'");
  if (*x < lo() || *x > hi()) return fail("value " + text + " outside [" + format_double(lo()) + ", " +
                                          format_double(hi()) + "]");
  if (kind() == Kind::Integer) {
    if (std::floor(*x) != *x) return fail("non-integral value " + text);
    return Value{static_cast<std::int64_t>(*x)};
  }
  const auto& r = std::get<RealDomain>(domain_);
  if (r.grid < 2) return Value{*x};
  auto i = std::clamp<std::int64_t>(std::llround((*x - r.lo) / r.step()), 0, r.grid - 1);
  return Value{r.point(i)};
}

std::size_t ConfigurationHash::operator()(const Configuration& c) const {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (const auto& v : c.values()) {
    std::size_t e = std::visit(overloaded{[](std::int64_t i) { return std::hash<std::int64_t>{}(i); },
                                          [](double d) { return std::hash<double>{}(d); },
                                          [](const std::string& s) { return std::hash<std::string>{}(s); }},
                               v);
    h ^= e + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

ParameterSpace::ParameterSpace(std::vector<ParameterDef> params, ParameterDef task_feature)
    : params_(std::move(params)), task_(std::move(task_feature)) {
  if (params_.empty()) throw DataError("space has no tunable parameters");
  if (!task_.is_numeric()) throw DataError("task feature '" + task_.name() + "' must be numeric");
  std::set<std::string> names;
  for (const auto& p : params_) {
    if (!p.is_finite())
      throw DataError("parameter '" + p.name() + "': real parameters need an explicit grid");
    if (!names.insert(p.name()).second) throw DataError("duplicate parameter name '" + p.name() + "'");
  }
  if (names.count(task_.name())) throw DataError("task feature name '" + task_.name() + "' clashes");
  if (names.count("objective") || task_.name() == "objective")
    throw DataError("'objective' is reserved");
}

std::optional<std::size_t> ParameterSpace::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name() == name) return i;
  return std::nullopt;
}

std::uint64_t ParameterSpace::cardinality() const {
  std::uint64_t total = 1;
  for (const auto& p : params_) {
    std::uint64_t n = p.option_count();
    if (total > std::numeric_limits<std::uint64_t>::max() / n)
      throw DataError("space cardinality overflows 64 bits");
    total *= n;
  }
  return total;
}

void ParameterSpace::enumerate(std::uint64_t cap,
                               const std::function<void(const Configuration&)>& visit) const {
  const std::uint64_t total = cardinality();
  if (total > cap)
    throw UsageError("space has " + std::to_string(total) + " configurations, above the enumeration cap of " +
                     std::to_string(cap));
  std::vector<std::uint64_t> idx(params_.size(), 0);
  for (std::uint64_t n = 0; n < total; ++n) {
    visit(from_indices(idx));
    for (std::size_t j = params_.size(); j-- > 0;) {
      if (++idx[j] < params_[j].option_count()) break;
      idx[j] = 0;
    }
  }
}

std::vector<Configuration> ParameterSpace::enumerate(std::uint64_t cap) const {
  std::vector<Configuration> out;
  enumerate(cap, [&](const Configuration& c) { out.push_back(c); });
  return out;
}

Configuration ParameterSpace::from_indices(std::span<const std::uint64_t> indices) const {
  std::vector<Value> values;
  values.reserve(params_.size());
  for (std::size_t j = 0; j < params_.size(); ++j) values.push_back(params_[j].value_at(indices[j]));
  return Configuration(std::move(values));
}

std::vector<std::uint64_t> ParameterSpace::indices_of(const Configuration& c) const {
  std::vector<std::uint64_t> out(params_.size());
  for (std::size_t j = 0; j < params_.size(); ++j) out[j] = params_[j].index_of(c[j]).value();
  return out;
}

Configuration ParameterSpace::validate(const std::map<std::string, std::string>& raw) const {
  std::vector<std::string> issues;
  for (const auto& [name, text] : raw) {
    if (name == task_.name() || name == "objective") continue;
    if (!index_of(name)) issues.push_back("unknown parameter '" + name + "'");
  }
  std::vector<Value> values;
  for (const auto& p : params_) {
    auto it = raw.find(p.name());
    if (it == raw.end()) {
      issues.push_back("'" + p.name() + "': missing");
      continue;
    }
    if (auto v = p.parse(it->second, issues)) values.push_back(std::move(*v));
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return Configuration(std::move(values));
}

std::map<std::string, std::string> ParameterSpace::serialize(const Configuration& c) const {
  std::map<std::string, std::string> out;
  for (std::size_t j = 0; j < params_.size(); ++j) out[params_[j].name()] = to_string(c[j]);
  return out;
}

bool ParameterSpace::contains(const Configuration& c) const {
  if (c.size() != params_.size()) return false;
  for (std::size_t j = 0; j < params_.size(); ++j)
    if (!params_[j].index_of(c[j])) return false;
  return true;
}

namespace {

nlohmann::json def_to_json(const ParameterDef& p) {
  nlohmann::json j;
  j["name"] = p.name();
  j["kind"] = std::string(kind_name(p.kind()));
  std::visit(overloaded{[&](const IntegerDomain& d) {
                          j["lo"] = d.lo;
                          j["hi"] = d.hi;
                        },
                        [&](const RealDomain& d) {
                          j["lo"] = d.lo;
                          j["hi"] = d.hi;
                          if (d.grid >= 2) j["grid"] = d.grid;
                        },
                        [&](const CategoricalDomain& d) { j["values"] = d.values; }},
             p.domain());
  return j;
}

ParameterDef def_from_json(const nlohmann::json& j) {
  try {
    const auto name = j.at("name").get<std::string>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "integer") {
      auto as_int = [&](const char* key) {
        double x = j.at(key).get<double>();
        if (std::floor(x) != x) throw DataError("parameter '" + name + "': integer bound not integral");
        return static_cast<std::int64_t>(x);
      };
      return ParameterDef(name, IntegerDomain{as_int("lo"), as_int("hi")});
    }
    if (kind == "real") {
      std::int64_t grid = j.contains("grid") ? j.at("grid").get<std::int64_t>() : 0;
      return ParameterDef(name, RealDomain{j.at("lo").get<double>(), j.at("hi").get<double>(), grid});
    }
    if (kind == "categorical")
      return ParameterDef(name, CategoricalDomain{j.at("values").get<std::vector<std::string>>()});
    throw DataError("parameter '" + name + "': unknown kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed parameter entry: ") + e.what());
  }
}

}  // namespace

nlohmann::json ParameterSpace::to_json() const {
  nlohmann::json j;
  j["parameters"] = nlohmann::json::array();
  for (const auto& p : params_) j["parameters"].push_back(def_to_json(p));
  j["task_feature"] = def_to_json(task_);
  return j;
}

ParameterSpace ParameterSpace::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("parameters") || !j.contains("task_feature"))
    throw DataError("space schema needs 'parameters' and 'task_feature'");
  if (!j.at("parameters").is_array()) throw DataError("'parameters' must be a list");
  std::vector<ParameterDef> params;
  for (const auto& pj : j.at("parameters")) params.push_back(def_from_json(pj));
  return ParameterSpace(std::move(params), def_from_json(j.at("task_feature")));
}

ParameterSpace ParameterSpace::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open space file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("space file '" + path + "': " + e.what());
  }
  return from_json(j);
}

std::string ParameterSpace::fingerprint() const {
  const std::string doc = to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : doc) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace gctune
