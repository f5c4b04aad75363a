#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "gctune/copula.hpp"
#include "gctune/error.hpp"
#include "gctune/linalg.hpp"
#include "gctune/rng.hpp"

using namespace gctune;

namespace {

ParameterDef real_task() { return ParameterDef("t", RealDomain{-10.0, 10.0}); }

// Model with hand-set marginals and correlation; the task marginal is a
// near-standard normal so forward(t) is t to many digits.
CopulaModel hand_model(const ParameterSpace& space, std::vector<MarginalTransform> tunables, Eigen::MatrixXd corr) {
  tunables.emplace_back("t", NumericMarginal{0.0, 1.0, -10.0, 10.0});
  return CopulaModel(space, std::move(tunables), std::move(corr), 0, 1.0, 0, {}, {});
}

CategoricalMarginal uniform_categorical(std::size_t k) {
  std::vector<std::size_t> all(k);
  for (std::size_t i = 0; i < k; ++i) all[i] = i;
  return fit_categorical(all, k);
}

ParameterSpace binary_space(std::size_t dims) {
  std::vector<ParameterDef> params;
  for (std::size_t i = 0; i < dims; ++i) params.emplace_back("b" + std::to_string(i), CategoricalDomain{{"x", "y"}});
  return ParameterSpace(std::move(params), real_task());
}

ParameterSpace grid_space() {
  return ParameterSpace({ParameterDef("x", IntegerDomain{0, 20}), ParameterDef("y", IntegerDomain{0, 20}),
                         ParameterDef("c", CategoricalDomain{{"p", "q", "r"}})},
                        ParameterDef("size", IntegerDomain{1, 100}));
}

// x tracks the task, y is noise, c leans towards "p".
Dataset comonotone_data(std::uint64_t seed, std::size_t per_task = 60) {
  Rng rng(seed);
  Dataset ds(grid_space());
  for (double t : {10.0, 50.0, 90.0}) {
    for (std::size_t i = 0; i < per_task; ++i) {
      const auto x = std::clamp<std::int64_t>(static_cast<std::int64_t>(t / 5) + static_cast<std::int64_t>(rng.below(3)) - 1, 0, 20);
      const auto y = static_cast<std::int64_t>(rng.below(21));
      const char* c = rng.uniform() < 0.6 ? "p" : (rng.uniform() < 0.5 ? "q" : "r");
      ds.add({Configuration({Value{x}, Value{y}, Value{std::string(c)}}), t, rng.uniform()});
    }
  }
  return ds;
}

void expect_valid_correlation(const Eigen::MatrixXd& m, bool unit_diagonal) {
  EXPECT_TRUE(is_symmetric(m, 1e-12));
  EXPECT_GE(min_eigenvalue(m), -1e-9);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (unit_diagonal)
      EXPECT_NEAR(m(i, i), 1.0, 1e-12);
    else
      EXPECT_LE(m(i, i), 1.0 + 1e-12);
  }
}

}  // namespace

TEST(Linalg, BivariateConditioning) {
  Eigen::Matrix2d sigma;
  sigma << 1.0, 0.5, 0.5, 1.0;
  auto cond = condition_on(sigma, 1, 2.0);
  EXPECT_FALSE(cond.independent);
  EXPECT_NEAR(cond.mean(0), 1.0, 1e-10);
  EXPECT_NEAR(cond.cov(0, 0), 0.75, 1e-10);
}

TEST(Linalg, DegenerateConditionColumn) {
  Eigen::Matrix2d sigma;
  sigma << 1.0, 0.0, 0.0, 0.0;
  auto cond = condition_on(sigma, 1, 2.0);
  EXPECT_TRUE(cond.independent);
  EXPECT_EQ(cond.mean(0), 0.0);
  EXPECT_EQ(cond.cov(0, 0), 1.0);
}

TEST(Linalg, RepairProducesCorrelation) {
  Eigen::Matrix3d bad;
  bad << 1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0;
  ASSERT_LT(min_eigenvalue(bad), 0.0);
  Eigen::MatrixXd fixed = repair_correlation(bad);
  expect_valid_correlation(fixed, true);
  Eigen::MatrixXd f = psd_factor(fixed);
  EXPECT_LT((f * f.transpose() - fixed).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fit, IndependentColumnsNearZero) {
  ParameterSpace s({ParameterDef("u", IntegerDomain{0, 999}), ParameterDef("v", IntegerDomain{0, 999})},
                   ParameterDef("size", IntegerDomain{1, 2}));
  Rng rng(12);
  Dataset ds(s);
  for (int i = 0; i < 1000; ++i)
    ds.add({Configuration({Value{static_cast<std::int64_t>(rng.below(1000))},
                           Value{static_cast<std::int64_t>(rng.below(1000))}}),
            static_cast<double>(1 + i % 2), 1.0});
  auto m = CopulaModel::fit(ds, 1);
  EXPECT_LT(std::abs(m.correlation()(0, 1)), 0.1);
  EXPECT_EQ(m.correlation()(0, 0), 1.0);
  expect_valid_correlation(m.correlation(), true);
}

TEST(Fit, MonotonePairsStronglyCorrelated) {
  ParameterSpace s({ParameterDef("u", IntegerDomain{0, 99}), ParameterDef("v", IntegerDomain{0, 99})},
                   ParameterDef("size", IntegerDomain{1, 2}));
  Rng rng(13);
  Dataset linear(s), curved(s);
  for (int i = 0; i < 500; ++i) {
    const auto u = static_cast<std::int64_t>(rng.below(100));
    linear.add({Configuration({Value{u}, Value{99 - u}}), static_cast<double>(1 + i % 2), 1.0});
    curved.add({Configuration({Value{u}, Value{u * u / 99}}), static_cast<double>(1 + i % 2), 1.0});
  }
  EXPECT_LT(CopulaModel::fit(linear, 1).correlation()(0, 1), -0.99);
  // Moment-fitted marginals are not rank transforms, so a skewed partner loses some correlation.
  EXPECT_GT(CopulaModel::fit(curved, 1).correlation()(0, 1), 0.8);
}

TEST(Fit, ColumnOrderAndMetadata) {
  auto ds = comonotone_data(1);
  auto m = CopulaModel::fit(ds, 77, 0.3);
  ASSERT_EQ(m.dimension(), 4u);
  EXPECT_EQ(m.transforms()[0].column(), "x");
  EXPECT_EQ(m.transforms()[2].column(), "c");
  EXPECT_EQ(m.task_transform().column(), "size");
  EXPECT_EQ(m.fitted_rows(), ds.size());
  EXPECT_EQ(m.seed(), 77u);
  EXPECT_EQ(m.task_values(), (std::vector<double>{10, 50, 90}));
  EXPECT_TRUE(m.warnings().empty());
  expect_valid_correlation(m.correlation(), true);
}

TEST(Fit, DegenerateColumnsAndSingleTask) {
  Dataset ds(grid_space());
  for (int i = 0; i < 5; ++i)
    ds.add({Configuration({Value{std::int64_t{3}}, Value{std::int64_t{3}}, Value{std::string("q")}}), 20, 1.0});
  auto m = CopulaModel::fit(ds, 0);
  EXPECT_FALSE(m.warnings().empty());
  auto batch = sample(m, 40, 3, 1);
  ASSERT_EQ(batch.configs.size(), 1u);
  EXPECT_TRUE(batch.saturated);
  EXPECT_EQ(std::get<std::int64_t>(batch.configs[0][0]), 3);
  EXPECT_THROW(CopulaModel::fit(Dataset(grid_space()), 0), DataError);
}

TEST(Fit, DeterministicGivenSeed) {
  auto ds = comonotone_data(4);
  EXPECT_EQ(CopulaModel::fit(ds, 9), CopulaModel::fit(ds, 9));
}

TEST(Conditional, IndependenceGivesZeroMean) {
  auto space = binary_space(2);
  auto m = hand_model(space, {{"b0", uniform_categorical(2)}, {"b1", uniform_categorical(2)}},
                      Eigen::MatrixXd::Identity(3, 3));
  auto c = conditional_latent(m, 4.0);
  EXPECT_EQ(c.mean.norm(), 0.0);
  EXPECT_TRUE(c.cov.isApprox(Eigen::MatrixXd::Identity(2, 2)));
}

TEST(Conditional, BivariateThroughModel) {
  ParameterSpace s({ParameterDef("x", IntegerDomain{0, 10})}, real_task());
  Eigen::Matrix2d corr;
  corr << 1.0, 0.5, 0.5, 1.0;
  auto m = hand_model(s, {{"x", NumericMarginal{5.0, 2.0, 0.0, 10.0, 1.0}}}, corr);
  auto c = conditional_latent(m, 2.0);
  EXPECT_NEAR(c.task_latent, 2.0, 1e-12);
  EXPECT_NEAR(c.mean(0), 1.0, 1e-10);
  EXPECT_NEAR(c.cov(0, 0), 0.75, 1e-10);
  auto at_median = conditional_latent(m, 0.0);
  EXPECT_NEAR(at_median.mean(0), 0.0, 1e-15);
  EXPECT_THROW(conditional_latent(m, 11.0), UsageError);
}

TEST(Conditional, ComonotoneShiftsDecodedMean) {
  auto m = CopulaModel::fit(comonotone_data(5), 5);
  auto mean_x = [&](double task) {
    ConditionalSampler s(m, task);
    Rng rng(31);
    double sum = 0, sq = 0;
    for (int i = 0; i < 1000; ++i) {
      const double x = static_cast<double>(std::get<std::int64_t>(s.draw(rng)[0]));
      sum += x;
      sq += x * x;
    }
    const double mu = sum / 1000;
    return std::pair{mu, std::sqrt((sq / 1000 - mu * mu) / 1000)};
  };
  auto [lo, se_lo] = mean_x(10);
  auto [hi, se_hi] = mean_x(90);
  EXPECT_GT(hi - lo, 3 * std::hypot(se_lo, se_hi));
}

TEST(Conditional, CovariancesAreValid) {
  auto m = CopulaModel::fit(comonotone_data(6), 6);
  for (double t : {1.0, 10.0, 33.0, 50.0, 99.0, 100.0}) {
    auto c = conditional_latent(m, t);
    expect_valid_correlation(c.cov, false);
  }
}

TEST(Sample, SingleDraw) {
  auto m = CopulaModel::fit(comonotone_data(7), 7);
  auto b = sample(m, 30, 1, 5);
  EXPECT_EQ(b.configs.size(), 1u);
  EXPECT_EQ(b.rejected_repeated, 0u);
  EXPECT_EQ(b.generated, 1u);
  EXPECT_THROW(sample(m, 30, 0, 5), UsageError);
}

TEST(Sample, DedupAccountingAndDeterminism) {
  auto m = CopulaModel::fit(comonotone_data(8), 8);
  auto a = sample(m, 50, 200, 99);
  auto b = sample(m, 50, 200, 99);
  EXPECT_EQ(a.configs, b.configs);
  EXPECT_EQ(a.generated, a.configs.size() + a.rejected_repeated);
  std::set<std::vector<std::uint64_t>> distinct;
  for (const auto& c : a.configs) {
    EXPECT_TRUE(m.space().contains(c));
    distinct.insert(m.space().indices_of(c));
  }
  EXPECT_EQ(distinct.size(), a.configs.size());
}

TEST(Sample, HonoursExclusionSet) {
  auto m = CopulaModel::fit(comonotone_data(9), 9);
  auto first = sample(m, 50, 20, 1);
  ConfigurationSet exclude(first.configs.begin(), first.configs.end());
  auto second = sample(m, 50, 20, 1, {&exclude, 0});
  for (const auto& c : second.configs) EXPECT_FALSE(exclude.count(c));
  EXPECT_GT(second.rejected_repeated, 0u);
}

TEST(Sample, SaturatesOnTinySpace) {
  auto space = binary_space(2);
  auto m = hand_model(space, {{"b0", uniform_categorical(2)}, {"b1", uniform_categorical(2)}},
                      Eigen::MatrixXd::Identity(3, 3));
  auto b = sample(m, 0.0, 10, 3);
  EXPECT_EQ(b.configs.size(), 4u);
  EXPECT_TRUE(b.saturated);
  EXPECT_EQ(b.generated, 1000u);
  EXPECT_EQ(b.generated, b.configs.size() + b.rejected_repeated);
}

TEST(RandomBatch, CoversTinySpaceAndIsUniform) {
  auto space = binary_space(3);
  auto all = random_batch(space, 8, 4, {nullptr, 100000});
  EXPECT_EQ(all.configs.size(), 8u);
  EXPECT_FALSE(all.saturated);

  Rng rng(0);
  ParameterSpace one({ParameterDef("b", CategoricalDomain{{"x", "y"}})}, real_task());
  std::size_t ones = 0;
  for (int i = 0; i < 10000; ++i) ones += random_batch(one, 1, static_cast<std::uint64_t>(i)).configs[0][0] == Value{std::string("y")};
  EXPECT_NEAR(ones / 10000.0, 0.5, 0.02);
}

TEST(RandomBatch, Deterministic) {
  auto space = grid_space();
  EXPECT_EQ(random_batch(space, 100, 3).configs, random_batch(space, 100, 3).configs);
}

TEST(Chao1, Formula) {
  EXPECT_EQ(chao1({}), 0.0);
  EXPECT_EQ(chao1({5, 5, 5}), 3.0);
  EXPECT_DOUBLE_EQ(chao1({1, 1, 2, 7}), 4 + 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(chao1({1, 1, 1}), 3 + 9.0);
  EXPECT_DOUBLE_EQ(chao1({0, 2, 2, 3}), 3.0);
}

TEST(EstimateUnique, ExactSupportFour) {
  auto space = binary_space(2);
  auto m = hand_model(space, {{"b0", uniform_categorical(2)}, {"b1", uniform_categorical(2)}},
                      Eigen::MatrixXd::Identity(3, 3));
  const double est = estimate_unique(m, 1.0, 10000, 5);
  EXPECT_GE(est, 4.0);
  EXPECT_LE(est, 4.5);
  EXPECT_THROW(estimate_unique(m, 1.0, 999, 5), UsageError);
}

TEST(EstimateUnique, DeterministicModelIsOne) {
  ParameterSpace s({ParameterDef("x", IntegerDomain{0, 9}), ParameterDef("y", IntegerDomain{0, 9})}, real_task());
  std::vector<double> xs{4, 4, 4};
  auto m = hand_model(s, {{"x", fit_numeric(xs, 0, 9, 1)}, {"y", fit_numeric(xs, 0, 9, 1)}},
                      Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(estimate_unique(m, 0.0, 10000, 1), 1.0);
}

TEST(EstimateUnique, UniformEightConfigs) {
  auto space = binary_space(3);
  std::vector<MarginalTransform> t;
  for (int i = 0; i < 3; ++i) t.emplace_back("b" + std::to_string(i), uniform_categorical(2));
  auto m = hand_model(space, std::move(t), Eigen::MatrixXd::Identity(4, 4));
  EXPECT_NEAR(estimate_unique(m, 0.0, 10000, 2), 8.0, 1.0);
}

TEST(Persistence, RoundTripsExactly) {
  auto m = CopulaModel::fit(comonotone_data(10), 10, 0.3);
  auto back = CopulaModel::from_json(nlohmann::json::parse(m.to_json().dump()));
  EXPECT_EQ(back, m);
  EXPECT_EQ(sample(back, 42, 25, 3).configs, sample(m, 42, 25, 3).configs);

  const auto dir = std::filesystem::path(GCTUNE_TEST_TMP);
  std::filesystem::create_directories(dir);
  const auto path = (dir / "model.json").string();
  m.save(path);
  EXPECT_EQ(CopulaModel::load(path), m);
}

TEST(Persistence, RejectsMismatches) {
  auto j = CopulaModel::fit(comonotone_data(11), 11).to_json();
  auto no_version = j;
  no_version.erase("version");
  EXPECT_THROW(CopulaModel::from_json(no_version), DataError);
  auto bad_fp = j;
  bad_fp["schema_fingerprint"] = "deadbeef";
  EXPECT_THROW(CopulaModel::from_json(bad_fp), DataError);
  auto asym = j;
  asym["correlation"]["row_major"][1] = 0.123456;
  EXPECT_THROW(CopulaModel::from_json(asym), DataError);
}

TEST(Sample, GcRejectsMoreRepeatsThanRandom) {
  // Wider space than the rest of this file: ~10^4 configurations.
  ParameterSpace s({ParameterDef("a", IntegerDomain{0, 21}), ParameterDef("b", IntegerDomain{0, 21}),
                    ParameterDef("c", IntegerDomain{0, 21})},
                   ParameterDef("size", IntegerDomain{1, 100}));
  Rng rng(3);
  Dataset ds(s);
  for (double t : {10.0, 50.0, 90.0})
    for (int i = 0; i < 60; ++i) {
      auto near = [&](std::int64_t centre) {
        return Value{std::clamp<std::int64_t>(centre + static_cast<std::int64_t>(rng.below(5)) - 2, 0, 21)};
      };
      ds.add({Configuration({near(static_cast<std::int64_t>(t / 5)), near(10), near(4)}), t, 1.0});
    }
  auto m = CopulaModel::fit(ds, 3);
  auto gc = sample(m, 30, 1000, 1);
  auto rnd = random_batch(s, 1000, 1);
  EXPECT_EQ(gc.configs.size(), 1000u);
  const double gc_frac = static_cast<double>(gc.rejected_repeated) / static_cast<double>(gc.generated);
  const double rnd_frac = static_cast<double>(rnd.rejected_repeated) / static_cast<double>(rnd.generated);
  EXPECT_GT(gc_frac, rnd_frac + 0.1);
}
