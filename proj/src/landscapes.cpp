#include "gctune/landscapes.hpp"

#include <algorithm>
#include <cmath>

#include "gctune/copula.hpp"
#include "gctune/error.hpp"
#include "gctune/rng.hpp"

namespace gctune {

namespace {

ParameterSpace tiled_space(std::string cat_name, std::vector<std::string> cat_values, std::string flag_name) {
  return ParameterSpace({ParameterDef("tile_i", IntegerDomain{0, 15}), ParameterDef("tile_j", IntegerDomain{0, 15}),
                         ParameterDef(std::move(cat_name), CategoricalDomain{std::move(cat_values)}),
                         ParameterDef(std::move(flag_name), CategoricalDomain{{"no", "yes"}})},
                        ParameterDef("size", IntegerDomain{100, 2000}));
}

// Runtime of the untuned kernel grows cubically with the input size.
double base_runtime(double task) { return 0.1 * std::pow(task / 400.0, 3.0); }

double tile(const ParameterSpace& s, const Configuration& c, std::size_t j) { return s.params()[j].numeric(c[j]); }

std::size_t option(const ParameterSpace& s, const Configuration& c, std::size_t j) {
  return static_cast<std::size_t>(*s.params()[j].index_of(c[j]));
}

// Packing gate shared by the bowl and rugged families: none, A, B, AB.
// Share of source evaluations drawn uniformly once the warm-up is over.
constexpr double kSourceExploration = 0.1;

constexpr double kPackGate[4] = {1.0, 0.8, 1.2, 1.05};

// Deterministic per-configuration roughness in [0, 1).
double roughness(double i, double j, std::size_t a, std::size_t b) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::uint64_t v : {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j), std::uint64_t{a},
                          std::uint64_t{b}}) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 31;
  }
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Landscape make_bowl() {
  auto space = tiled_space("pack", {"none", "A", "B", "AB"}, "interchange");
  auto f = [](const ParameterSpace& s, const Configuration& c, double t) {
    const double shift = (t - 400.0) / 800.0;
    const double oi = std::clamp(3.0 + 8.0 * shift, 0.0, 15.0);
    const double oj = std::clamp(12.0 - 6.0 * shift, 0.0, 15.0);
    const double di = tile(s, c, 0) - oi, dj = tile(s, c, 1) - oj;
    const double flag = option(s, c, 3) == 1 ? 0.95 : 1.0;
    return base_runtime(t) * (1.0 + 0.05 * di * di + 0.05 * dj * dj) * kPackGate[option(s, c, 2)] * flag;
  };
  Configuration def = space.from_indices(std::vector<std::uint64_t>{0, 0, 0, 0});
  return Landscape("bowl", "task-scaled quadratic bowl over both tiles, gated by the packing choice",
                   std::move(space), f, std::move(def));
}

Landscape make_switch() {
  auto space = tiled_space("algo", {"blocked", "streaming", "recursive", "naive"}, "unroll");
  auto f = [](const ParameterSpace& s, const Configuration& c, double t) {
    const double blend = 1.0 / (1.0 + std::exp(-(t - 900.0) / 120.0));
    const double algo[4] = {0.75 + 0.55 * blend, 1.30 - 0.55 * blend, 1.1, 1.35};
    const double di = tile(s, c, 0) - 10.0, dj = tile(s, c, 1) - 4.0;
    const double flag = option(s, c, 3) == 1 ? 0.95 : 1.0;
    return base_runtime(t) * (1.0 + 0.04 * di * di + 0.04 * dj * dj) * algo[option(s, c, 2)] * flag;
  };
  Configuration def = space.from_indices(std::vector<std::uint64_t>{0, 0, 3, 0});
  return Landscape("switch", "best algorithm flips from blocked to streaming as the input grows",
                   std::move(space), f, std::move(def));
}

Landscape make_rugged() {
  auto space = tiled_space("pack", {"none", "A", "B", "AB"}, "interchange");
  auto f = [](const ParameterSpace& s, const Configuration& c, double t) {
    const double center = 3.0 + 6.0 * (t - 400.0) / 800.0;
    const double xi = tile(s, c, 0), xj = tile(s, c, 1);
    const double di = xi - center, ridge = (xj - xi) - 2.0;
    const std::size_t pack = option(s, c, 2), flag = option(s, c, 3);
    const double rough = 1.0 + 0.10 * roughness(xi, xj, pack, flag);
    return base_runtime(t) * (1.0 + 0.05 * di * di + 0.08 * ridge * ridge) * rough * kPackGate[pack] *
           (flag == 1 ? 0.95 : 1.0);
  };
  Configuration def = space.from_indices(std::vector<std::uint64_t>{0, 0, 0, 0});
  return Landscape("rugged", "diagonal ridge between the tiles drifting with the input, plus fixed roughness",
                   std::move(space), f, std::move(def));
}

}  // namespace

Landscape::Landscape(std::string name, std::string description, ParameterSpace space, Objective objective,
                     Configuration default_config)
    : name_(std::move(name)),
      description_(std::move(description)),
      space_(std::move(space)),
      objective_(std::move(objective)),
      default_(std::move(default_config)) {}

std::vector<std::string> landscape_names() { return {"bowl", "switch", "rugged"}; }

Landscape make_landscape(std::string_view name) {
  if (name == "bowl") return make_bowl();
  if (name == "switch") return make_switch();
  if (name == "rugged") return make_rugged();
  std::string names;
  for (const auto& n : landscape_names()) names += (names.empty() ? "" : ", ") + n;
  throw UsageError("unknown landscape '" + std::string(name) + "'; available: " + names);
}

Dataset generate_source_data(const Landscape& landscape, std::size_t per_task, std::uint64_t seed) {
  const auto& space = landscape.space();
  const std::size_t dims = space.size();
  if (per_task == 0 || per_task > space.cardinality())
    throw UsageError("per-task source count must lie in [1, " + std::to_string(space.cardinality()) + "]");
  Rng rng(seed);
  Dataset ds(space);
  const std::size_t warmup = std::max<std::size_t>(1, per_task / 5);
  std::vector<std::uint64_t> idx(dims);
  for (double task : Landscape::kSourceTasks) {
    std::vector<std::pair<double, std::vector<std::uint64_t>>> seen;
    ConfigurationSet visited;
    auto random_point = [&] {
      for (std::size_t j = 0; j < dims; ++j) idx[j] = rng.below(space.params()[j].option_count());
    };
    for (std::size_t n = 0; n < per_task; ++n) {
      // Exploit-biased local search: mutate one of the best points so far,
      // falling back to a uniform draw when the neighbourhood is exhausted.
      bool fresh = false;
      for (int attempt = 0; attempt < 50 && !fresh; ++attempt) {
        if (n < warmup || rng.uniform() < kSourceExploration) {
          random_point();
        } else {
          std::sort(seen.begin(), seen.end());
          const std::size_t elite = std::max<std::size_t>(1, seen.size() / 10);
          idx = seen[rng.below(elite)].second;
          const std::size_t j = rng.below(dims);
          const auto count = space.params()[j].option_count();
          if (space.params()[j].kind() == Kind::Categorical) {
            idx[j] = rng.below(count);
          } else {
            const auto step = static_cast<std::int64_t>(rng.below(2)) + 1;
            const auto moved = static_cast<std::int64_t>(idx[j]) + (rng.below(2) ? step : -step);
            idx[j] = static_cast<std::uint64_t>(std::clamp<std::int64_t>(moved, 0, static_cast<std::int64_t>(count) - 1));
          }
        }
        fresh = !visited.count(space.from_indices(idx));
      }
      while (!fresh) {
        random_point();
        fresh = !visited.count(space.from_indices(idx));
      }
      Configuration c = space.from_indices(idx);
      visited.insert(c);
      const double y = landscape.objective(c, task);
      seen.emplace_back(y, idx);
      ds.add({std::move(c), task, y});
    }
  }
  return ds;
}

std::vector<double> exhaustive_objectives(const Landscape& landscape, double task_value) {
  std::vector<double> out;
  landscape.space().enumerate(landscape.space().cardinality(), [&](const Configuration& c) {
    out.push_back(landscape.objective(c, task_value));
  });
  return out;
}

}  // namespace gctune
