#include "gctune/budget.hpp"

#include <algorithm>
#include <cmath>

#include "gctune/error.hpp"

namespace gctune {

namespace {

// Above this many factors the product is replaced by log-gamma differences.
constexpr std::uint64_t kProductLimit = 10'000'000;

void check_counts(std::uint64_t total, std::uint64_t ideal, std::uint64_t draws) {
  if (ideal > total || draws > total)
    throw UsageError("hypergeometric arguments need ideal <= total and draws <= total");
}

double log_binomial(double n, double r) {
  return std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
}

// log(1 - I / (total - j)): one factor of C(total - I, k) / C(total, k).
double log_miss_factor(std::uint64_t total, std::uint64_t ideal, std::uint64_t j) {
  return std::log1p(-static_cast<double>(ideal) / static_cast<double>(total - j));
}

}  // namespace

double p_at_least_one(std::uint64_t total, std::uint64_t ideal, std::uint64_t draws) {
  check_counts(total, ideal, draws);
  if (ideal == 0 || draws == 0) return 0.0;
  if (draws > total - ideal) return 1.0;
  double log_none = 0.0;
  if (draws <= kProductLimit) {
    for (std::uint64_t j = 0; j < draws; ++j) log_none += log_miss_factor(total, ideal, j);
  } else {
    const double c = static_cast<double>(total), i = static_cast<double>(ideal), k = static_cast<double>(draws);
    log_none = log_binomial(c - i, k) - log_binomial(c, k);
  }
  return -std::expm1(log_none);
}

double p_at_least_one_summation(std::uint64_t total, std::uint64_t ideal, std::uint64_t draws) {
  check_counts(total, ideal, draws);
  const double c = static_cast<double>(total), i_count = static_cast<double>(ideal);
  const double k = static_cast<double>(draws);
  const double log_denominator = log_binomial(c, k);
  double sum = 0.0;
  for (std::uint64_t i = 1; i <= std::min(draws, ideal); ++i) {
    if (draws - i > total - ideal) continue;
    const double x = static_cast<double>(i);
    sum += std::exp(log_binomial(i_count, x) + log_binomial(c - i_count, k - x) - log_denominator);
  }
  return std::min(sum, 1.0);
}

void BudgetInputs::validate() const {
  if (full_space == 0) throw UsageError("full space size must be positive");
  if (effective_space == 0 || effective_space > full_space)
    throw UsageError("effective space size must lie in [1, full space size]");
  if (!(ideal_fraction > 0.0 && ideal_fraction < 1.0)) throw UsageError("ideal fraction must lie in (0, 1)");
  if (!(confidence > 0.0 && confidence < 1.0)) throw UsageError("confidence must lie in (0, 1)");
  if (!(pruned_optimal_allowance >= 0.0 && pruned_optimal_allowance < 1.0))
    throw UsageError("allowance must lie in [0, 1)");
  if (max_budget == 0) throw UsageError("max budget must be at least 1");
}

BudgetEstimate min_budget(const BudgetInputs& in) {
  in.validate();
  BudgetEstimate out;
  out.coverage_ratio = static_cast<double>(in.effective_space) / static_cast<double>(in.full_space);
  if (out.coverage_ratio < in.pruned_optimal_allowance) {
    out.reason = "reduction below allowance";
    return out;
  }
  const std::uint64_t total = in.effective_space;
  const auto rounded = static_cast<std::uint64_t>(std::llround(in.ideal_fraction * static_cast<double>(total)));
  out.ideal_count = std::clamp<std::uint64_t>(rounded, 1, total);

  // Same accumulation order as p_at_least_one, so the returned k satisfies
  // its minimality check bit for bit.
  double log_none = 0.0;
  std::uint64_t k = 0;
  double p = 0.0;
  while (p < in.confidence) {
    if (k >= kProductLimit) {
      // Past the product range: bisect on the closed form.
      std::uint64_t lo = k, hi = total - out.ideal_count + 1;
      while (lo + 1 < hi) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        (p_at_least_one(total, out.ideal_count, mid) >= in.confidence ? hi : lo) = mid;
      }
      k = hi;
      break;
    }
    if (k > total - out.ideal_count) break;
    log_none += log_miss_factor(total, out.ideal_count, k);
    ++k;
    p = k > total - out.ideal_count ? 1.0 : -std::expm1(log_none);
  }
  out.defined = true;
  out.k_star = k;
  out.probability_at_k = p_at_least_one(total, out.ideal_count, k);
  out.exceeds_max_budget = k > in.max_budget;
  return out;
}

std::vector<double> probability_curve(std::uint64_t total, std::uint64_t ideal, std::uint64_t max_k) {
  std::vector<double> curve;
  curve.reserve(max_k);
  for (std::uint64_t k = 1; k <= max_k; ++k) curve.push_back(p_at_least_one(total, ideal, std::min(k, total)));
  return curve;
}

}  // namespace gctune
