#include <gtest/gtest.h>

#include <set>

#include "gctune/error.hpp"
#include "gctune/rng.hpp"
#include "gctune/space.hpp"

using namespace gctune;

namespace {

ParameterDef task() { return ParameterDef("n", IntegerDomain{1, 1000}); }

ParameterSpace sized(const std::vector<std::int64_t>& sizes) {
  std::vector<ParameterDef> params;
  for (std::size_t i = 0; i < sizes.size(); ++i)
    params.emplace_back("p" + std::to_string(i), IntegerDomain{0, sizes[i] - 1});
  return ParameterSpace(std::move(params), task());
}

ParameterSpace mixed() {
  return ParameterSpace({ParameterDef("tile", IntegerDomain{2, 16}), ParameterDef("alpha", RealDomain{0.0, 1.0, 5}),
                         ParameterDef("order", CategoricalDomain{{"ijk", "ikj", "jik"}})},
                        task());
}

// Random schema mixing all three kinds, sized to keep |C| small.
ParameterSpace random_schema(Rng& rng) {
  std::vector<ParameterDef> params;
  const auto dims = 1 + rng.below(4);
  for (std::uint64_t d = 0; d < dims; ++d) {
    const std::string name = "x" + std::to_string(d);
    switch (rng.below(3)) {
      case 0: {
        const auto lo = static_cast<std::int64_t>(rng.below(10)) - 5;
        params.emplace_back(name, IntegerDomain{lo, lo + 1 + static_cast<std::int64_t>(rng.below(11))});
        break;
      }
      case 1:
        params.emplace_back(name, RealDomain{-1.0, 2.5, static_cast<std::int64_t>(2 + rng.below(9))});
        break;
      default: {
        std::vector<std::string> values;
        for (std::uint64_t k = 0, n = 1 + rng.below(5); k < n; ++k) values.push_back("v" + std::to_string(k));
        params.emplace_back(name, CategoricalDomain{values});
      }
    }
  }
  return ParameterSpace(std::move(params), task());
}

}  // namespace

TEST(Cardinality, ProductOfOptionCounts) {
  EXPECT_EQ(sized({11, 4, 121}).cardinality(), 5324u);
  EXPECT_EQ(sized({2, 3}).cardinality(), 6u);
  ParameterSpace single({ParameterDef("c", CategoricalDomain{{"only"}})}, task());
  EXPECT_EQ(single.cardinality(), 1u);
  EXPECT_EQ(mixed().cardinality(), 15u * 5u * 3u);
}

TEST(Cardinality, LargeSpacesDoNotOverflow) {
  EXPECT_EQ(sized({1000000, 1000000}).cardinality(), 1000000000000ull);
  EXPECT_THROW(sized({1 << 30, 1 << 30, 1 << 30}).cardinality(), DataError);
}

TEST(Enumerate, SmallSpaces) {
  EXPECT_EQ(sized({2, 2}).enumerate(100).size(), 4u);
  EXPECT_EQ(ParameterSpace({ParameterDef("only", CategoricalDomain{{"x"}})}, task()).enumerate(100).size(), 1u);
  auto s = sized({3, 2});
  EXPECT_EQ(s.enumerate(100).size(), s.cardinality());
}

TEST(Enumerate, LexicographicLastFastest) {
  auto all = sized({2, 3}).enumerate(10);
  ASSERT_EQ(all.size(), 6u);
  EXPECT_EQ(std::get<std::int64_t>(all[0][0]), 0);
  EXPECT_EQ(std::get<std::int64_t>(all[0][1]), 0);
  EXPECT_EQ(std::get<std::int64_t>(all[1][1]), 1);
  EXPECT_EQ(std::get<std::int64_t>(all[3][0]), 1);
  EXPECT_EQ(std::get<std::int64_t>(all[3][1]), 0);
}

TEST(Enumerate, CapExceededReportsCardinality) {
  try {
    sized({10, 10}).enumerate(99);
    FAIL() << "expected a refusal";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("100"), std::string::npos);
  }
}

TEST(Enumerate, PropertyCountAndDistinctness) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto space = random_schema(rng);
    ASSERT_LE(space.cardinality(), 100000u);
    std::set<std::vector<std::uint64_t>> seen;
    std::uint64_t count = 0;
    space.enumerate(100000, [&](const Configuration& c) {
      ++count;
      EXPECT_TRUE(space.contains(c));
      seen.insert(space.indices_of(c));
    });
    EXPECT_EQ(count, space.cardinality());
    EXPECT_EQ(seen.size(), count);
  }
}

TEST(Validate, BoundsAndTypes) {
  auto s = mixed();
  auto c = s.validate({{"tile", "2"}, {"alpha", "0.25"}, {"order", "jik"}});
  EXPECT_EQ(std::get<std::int64_t>(c[0]), 2);
  EXPECT_DOUBLE_EQ(std::get<double>(c[1]), 0.25);
  EXPECT_EQ(std::get<std::string>(c[2]), "jik");

  auto seven = s.validate({{"tile", "7.0"}, {"alpha", "1"}, {"order", "ijk"}});
  EXPECT_EQ(std::get<std::int64_t>(seven[0]), 7);
  EXPECT_THROW(s.validate({{"tile", "7.5"}, {"alpha", "1"}, {"order", "ijk"}}), ValidationError);
}

TEST(Validate, NamesEachViolation) {
  auto s = mixed();
  try {
    s.validate({{"tile", "99"}, {"alpha", "0.5"}, {"order", "kji"}, {"bogus", "1"}});
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("tile"), std::string::npos);
    EXPECT_NE(msg.find("order"), std::string::npos);
    EXPECT_NE(msg.find("bogus"), std::string::npos);
    EXPECT_EQ(e.issues().size(), 3u);
  }
  EXPECT_THROW(s.validate({{"tile", "4"}, {"alpha", "0.5"}}), ValidationError);
  EXPECT_THROW(s.validate({{"tile", "four"}, {"alpha", "0.5"}, {"order", "ijk"}}), ValidationError);
}

TEST(Validate, RoundTripsSerialize) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto space = random_schema(rng);
    space.enumerate(100000, [&](const Configuration& c) { EXPECT_EQ(space.validate(space.serialize(c)), c); });
  }
}

TEST(Schema, RejectsInvalidDefinitions) {
  EXPECT_THROW(ParameterDef("a", IntegerDomain{3, 3}), DataError);
  EXPECT_THROW(ParameterDef("a", CategoricalDomain{{}}), DataError);
  EXPECT_THROW(ParameterDef("a", CategoricalDomain{{"x", "x"}}), DataError);
  EXPECT_THROW(ParameterSpace({ParameterDef("a", IntegerDomain{0, 1}), ParameterDef("a", IntegerDomain{0, 1})},
                              task()),
               DataError);
  EXPECT_THROW(ParameterSpace({ParameterDef("r", RealDomain{0.0, 1.0})}, task()), DataError);
  EXPECT_THROW(ParameterSpace({ParameterDef("a", IntegerDomain{0, 1})}, ParameterDef("t", CategoricalDomain{{"s"}})),
               DataError);
}

TEST(Schema, JsonRoundTrip) {
  auto s = mixed();
  auto back = ParameterSpace::from_json(nlohmann::json::parse(s.to_json().dump()));
  EXPECT_EQ(back, s);
  EXPECT_EQ(back.fingerprint(), s.fingerprint());
  EXPECT_EQ(back.cardinality(), s.cardinality());
}

TEST(Schema, TaskFeatureMayBeContinuous) {
  ParameterSpace s({ParameterDef("a", IntegerDomain{0, 3})}, ParameterDef("size", RealDomain{0.5, 8.0}));
  EXPECT_TRUE(s.task_feature().contains(1.25));
  EXPECT_FALSE(s.task_feature().contains(9.0));
}

TEST(RealGrid, EndpointsExact) {
  RealDomain d{0.1, 0.7, 7};
  EXPECT_EQ(d.point(0), 0.1);
  EXPECT_EQ(d.point(6), 0.7);
  ParameterDef p("r", d);
  EXPECT_EQ(p.option_count(), 7u);
  EXPECT_EQ(*p.index_of(p.value_at(3)), 3u);
}
