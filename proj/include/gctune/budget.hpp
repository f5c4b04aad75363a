#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gctune {

// P(at least one of `ideal` items is drawn in `draws` draws without
// replacement from `total`), as 1 - C(total - ideal, draws) / C(total, draws)
// accumulated in log space. Exact 1 when draws > total - ideal.
double p_at_least_one(std::uint64_t total, std::uint64_t ideal, std::uint64_t draws);

// Same probability as the sum over i >= 1 of the hypergeometric mass
// C(ideal, i) C(total - ideal, draws - i) / C(total, draws).
double p_at_least_one_summation(std::uint64_t total, std::uint64_t ideal, std::uint64_t draws);

struct BudgetInputs {
  std::uint64_t full_space = 0;
  std::uint64_t effective_space = 0;
  double ideal_fraction = 0.01;
  double pruned_optimal_allowance = 0.05;
  double confidence = 0.95;
  std::uint64_t max_budget = 30;

  // Throws UsageError when a knob is out of range.
  void validate() const;
};

struct BudgetEstimate {
  bool defined = false;
  std::string reason;  // set when undefined
  double coverage_ratio = 0.0;
  std::uint64_t ideal_count = 0;
  std::uint64_t k_star = 0;
  double probability_at_k = 0.0;
  bool exceeds_max_budget = false;
};

// Undefined when effective/full falls below the allowance; otherwise the
// smallest k reaching `confidence` with I_eff = max(1, round(fraction * effective)).
BudgetEstimate min_budget(const BudgetInputs& in);

// P(k) for k = 1..max_k.
std::vector<double> probability_curve(std::uint64_t total, std::uint64_t ideal, std::uint64_t max_k);

}  // namespace gctune
