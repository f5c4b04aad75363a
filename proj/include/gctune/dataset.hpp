#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "gctune/space.hpp"

namespace gctune {

// One observed sample of the objective: lower is better.
struct TuningRecord {
  Configuration config;
  double task_value;
  double objective;
};

class Dataset {
 public:
  explicit Dataset(ParameterSpace space) : space_(std::move(space)) {}
  Dataset(ParameterSpace space, std::vector<TuningRecord> records);

  const ParameterSpace& space() const { return space_; }
  const std::vector<TuningRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // Validates before appending; throws DataError.
  void add(TuningRecord r);
  void append(const Dataset& other);

  // Sorted distinct task values.
  std::vector<double> task_values() const;
  std::map<double, std::size_t> task_counts() const;

  // Per-task row counts of the unfiltered data this dataset was cut from.
  // Empty unless produced by quantile_filter; add/append clear it.
  const std::map<double, std::size_t>& source_counts() const { return source_counts_; }

 private:
  friend Dataset quantile_filter(const Dataset& ds, double q);

  ParameterSpace space_;
  std::vector<TuningRecord> records_;
  std::map<double, std::size_t> source_counts_;
};

// CSV with a header naming every tunable, the task feature and `objective`.
// Extra columns are ignored. Errors name the 1-based file row.
Dataset read_csv(std::istream& in, const ParameterSpace& space, const std::string& source = "<stream>");
Dataset load_csv(const std::string& path, const ParameterSpace& space);
void write_csv(std::ostream& out, const Dataset& ds);

// Per task value, keeps the ceil(q * n_t) records with the smallest objective
// (ties by original order). Output keeps input order. n_t counts the source
// rows, so filtering an already filtered dataset at q' keeps the records a
// direct filter at min(q, q') would: repeated filtering at one q is a no-op.
Dataset quantile_filter(const Dataset& ds, double q);

// Product over tunables of observed-distinct / total options. 0 when empty.
double coverage(const Dataset& ds);

// Mean over tunables of KL(P || Q) in nats, P from `ds`, Q from `ref`, both
// smoothed by kKlSmoothing per option and renormalized.
double avg_marginal_kl(const Dataset& ds, const Dataset& ref);

inline constexpr double kKlSmoothing = 1e-6;
inline constexpr double kDefaultQuantile = 0.30;
inline constexpr double kQuantileFloor = 0.15;

struct FilterReport {
  double quantile;
  std::size_t kept;
  std::size_t total;
  double coverage;
  double avg_marginal_kl;
};

FilterReport filter_report(const Dataset& ds, const Dataset& ref, double q);

}  // namespace gctune
