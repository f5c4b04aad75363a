#include "gctune/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "gctune/error.hpp"

namespace gctune {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c); };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void check_record(const ParameterSpace& space, const TuningRecord& r) {
  if (!space.contains(r.config)) throw DataError("record configuration does not match the space");
  if (!space.task_feature().contains(r.task_value))
    throw DataError("task value " + std::to_string(r.task_value) + " outside the task feature domain");
  if (!std::isfinite(r.objective)) throw DataError("objective must be finite");
}

// Per-parameter option counts observed in `ds`.
std::vector<std::vector<double>> option_counts(const Dataset& ds) {
  const auto& params = ds.space().params();
  std::vector<std::vector<double>> counts(params.size());
  for (std::size_t j = 0; j < params.size(); ++j) counts[j].assign(params[j].option_count(), 0.0);
  for (const auto& r : ds.records())
    for (std::size_t j = 0; j < params.size(); ++j) counts[j][*params[j].index_of(r.config[j])] += 1.0;
  return counts;
}

}  // namespace

Dataset::Dataset(ParameterSpace space, std::vector<TuningRecord> records) : space_(std::move(space)) {
  for (auto& r : records) add(std::move(r));
}

void Dataset::add(TuningRecord r) {
  check_record(space_, r);
  records_.push_back(std::move(r));
  source_counts_.clear();
}

void Dataset::append(const Dataset& other) {
  if (!(other.space() == space_)) throw DataError("cannot merge datasets over different spaces");
  records_.insert(records_.end(), other.records().begin(), other.records().end());
  source_counts_.clear();
}

std::vector<double> Dataset::task_values() const {
  std::set<double> s;
  for (const auto& r : records_) s.insert(r.task_value);
  return {s.begin(), s.end()};
}

std::map<double, std::size_t> Dataset::task_counts() const {
  std::map<double, std::size_t> m;
  for (const auto& r : records_) ++m[r.task_value];
  return m;
}

Dataset read_csv(std::istream& in, const ParameterSpace& space, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(source + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> param_cols;
  for (const auto& p : space.params()) param_cols.push_back(column(p.name()));
  const std::size_t task_col = column(space.task_feature().name());
  const std::size_t obj_col = column("objective");

  Dataset ds(space);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    const std::string where = source + " row " + std::to_string(row);
    if (cells.size() < header.size())
      throw DataError(where + ": expected " + std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    std::map<std::string, std::string> raw;
    for (std::size_t j = 0; j < param_cols.size(); ++j) raw[space.params()[j].name()] = trim(cells[param_cols[j]]);
    Configuration config;
    try {
      config = space.validate(raw);
    } catch (const ValidationError& e) {
      throw DataError(where + ": " + e.what());
    }
    std::vector<std::string> issues;
    auto task = space.task_feature().parse(trim(cells[task_col]), issues);
    auto obj_text = trim(cells[obj_col]);
    double objective = 0.0;
    try {
      std::size_t used = 0;
      objective = std::stod(obj_text, &used);
      if (used != obj_text.size() || !std::isfinite(objective)) throw std::invalid_argument("x");
    } catch (const std::exception&) {
      issues.push_back("'objective': unparsable value '" + obj_text + "'");
    }
    if (!issues.empty()) throw DataError(where + ": " + ValidationError(issues).what());
    ds.add({std::move(config), space.task_feature().numeric(*task), objective});
  }
  return ds;
}

Dataset load_csv(const std::string& path, const ParameterSpace& space) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  return read_csv(in, space, path);
}

void write_csv(std::ostream& out, const Dataset& ds) {
  const auto& space = ds.space();
  for (const auto& p : space.params()) out << quote_if_needed(p.name()) << ',';
  out << quote_if_needed(space.task_feature().name()) << ",objective\n";
  for (const auto& r : ds.records()) {
    for (std::size_t j = 0; j < space.size(); ++j) out << quote_if_needed(to_string(r.config[j])) << ',';
    out << to_string(Value{r.task_value}) << ',' << to_string(Value{r.objective}) << '\n';
  }
}

Dataset quantile_filter(const Dataset& ds, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw UsageError("quantile must lie in (0, 1]");
  if (ds.empty()) throw DataError("cannot filter an empty dataset");
  const auto& recs = ds.records();
  std::map<double, std::vector<std::size_t>> by_task;
  for (std::size_t i = 0; i < recs.size(); ++i) by_task[recs[i].task_value].push_back(i);

  std::map<double, std::size_t> source = ds.source_counts();
  if (source.empty())
    for (const auto& [task, idx] : by_task) source[task] = idx.size();

  std::vector<bool> keep(recs.size(), false);
  for (auto& [task, idx] : by_task) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return recs[a].objective < recs[b].objective; });
    // Guard against q * n landing a hair above an integer.
    auto n_keep = static_cast<std::size_t>(std::ceil(q * static_cast<double>(source.at(task)) - 1e-9));
    n_keep = std::clamp<std::size_t>(n_keep, 1, idx.size());
    for (std::size_t k = 0; k < n_keep; ++k) keep[idx[k]] = true;
  }
  Dataset out(ds.space());
  for (std::size_t i = 0; i < recs.size(); ++i)
    if (keep[i]) out.records_.push_back(recs[i]);
  out.source_counts_ = std::move(source);
  return out;
}

double coverage(const Dataset& ds) {
  if (ds.empty()) return 0.0;
  double frac = 1.0;
  for (const auto& counts : option_counts(ds)) {
    auto seen = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; });
    frac *= static_cast<double>(seen) / static_cast<double>(counts.size());
  }
  return frac;
}

double avg_marginal_kl(const Dataset& ds, const Dataset& ref) {
  if (!(ds.space() == ref.space())) throw DataError("KL divergence needs datasets over the same space");
  if (ds.empty() || ref.empty()) throw DataError("KL divergence needs non-empty datasets");
  auto p_counts = option_counts(ds);
  auto q_counts = option_counts(ref);
  double total = 0.0;
  for (std::size_t j = 0; j < p_counts.size(); ++j) {
    auto normalize = [](std::vector<double> c, double n) {
      double z = 0.0;
      for (auto& x : c) z += (x = x / n + kKlSmoothing);
      for (auto& x : c) x /= z;
      return c;
    };
    auto p = normalize(p_counts[j], static_cast<double>(ds.size()));
    auto q = normalize(q_counts[j], static_cast<double>(ref.size()));
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) kl += p[i] * std::log(p[i] / q[i]);
    total += std::max(kl, 0.0);
  }
  return total / static_cast<double>(p_counts.size());
}

FilterReport filter_report(const Dataset& ds, const Dataset& ref, double q) {
  Dataset kept = quantile_filter(ds, q);
  return {q, kept.size(), ds.size(), coverage(kept), avg_marginal_kl(kept, ref)};
}

}  // namespace gctune
