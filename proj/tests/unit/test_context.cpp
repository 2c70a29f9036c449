#include <gtest/gtest.h>

#include <cmath>

#include "aeq/context.hpp"
#include "aeq/error.hpp"
#include "aeq/rng.hpp"
#include "oracles.hpp"

namespace {

using aeq::BigCount;
using aeq::ContextInstance;
using aeq::ContextSchema;
using aeq::PropertyKind;
using aeq::PropertySpec;
using aeq::SpaceMode;

ContextSchema small_schema(std::vector<std::string> constraints = {"p2 <= p1"}) {
  return ContextSchema({{"p1", PropertyKind::Integer, 1, 4, 1}, {"p2", PropertyKind::Integer, 1, 4, 1}}, constraints);
}

TEST(ContextSchema, WebServerInstances) {
  const auto s = aeq::web_server_schema();
  EXPECT_TRUE(s.validate({{12, 3, 0.5}}).valid);
  EXPECT_TRUE(s.validate({{1, 1, 0}}).valid);

  const auto r = s.validate({{5, 100, 1}});
  EXPECT_FALSE(r.valid);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_NE(r.violations[0].find("file_number <= request_density"), std::string::npos);
}

TEST(ContextSchema, BoundsAndGridViolationsAreAllListed) {
  const auto s = aeq::web_server_schema();
  const auto r = s.validate({{0, 1, 0.55}});
  EXPECT_FALSE(r.valid);
  EXPECT_GE(r.violations.size(), 2u);
}

TEST(ContextSchema, ArityMismatchIsStructural) {
  const auto s = aeq::web_server_schema();
  try {
    s.validate({{1, 1}});
    FAIL();
  } catch (const aeq::Error& e) {
    EXPECT_EQ(e.category(), aeq::ErrorCategory::Structural);
  }
}

TEST(ContextSchema, RejectsMalformedProperties) {
  EXPECT_THROW(ContextSchema({}, {}), aeq::Error);
  EXPECT_THROW(ContextSchema({{"a", PropertyKind::Integer, 5, 1, 1}}, {}), aeq::Error);
  EXPECT_THROW(ContextSchema({{"a", PropertyKind::Integer, 0, 1, 0}}, {}), aeq::Error);
  EXPECT_THROW(ContextSchema({{"a", PropertyKind::Integer, 0, 1, 1}, {"a", PropertyKind::Integer, 0, 1, 1}}, {}),
               aeq::Error);
  EXPECT_THROW(ContextSchema({{"a", PropertyKind::Integer, 0, 1, 1}}, {"b < 1"}), aeq::ParseError);
}

TEST(ContextSchema, ValidateIsPure) {
  const auto s = aeq::web_server_schema();
  aeq::Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    ContextInstance x{{static_cast<double>(rng.between(0, 1001)), static_cast<double>(rng.between(0, 1001)),
                       rng.between(0, 12) / 10.0}};
    const auto a = s.validate(x);
    const auto b = s.validate(x);
    EXPECT_EQ(a.valid, b.valid);
    EXPECT_EQ(a.violations, b.violations);
  }
}

TEST(PropertySpec, GridValuesAreCanonical) {
  PropertySpec p{"d", PropertyKind::Real, 0, 1, 0.1};
  EXPECT_EQ(p.cardinality(), 11);
  EXPECT_EQ(p.value_at(3), 0.3);
  EXPECT_EQ(p.value_at(10), 1.0);
  EXPECT_TRUE(p.on_grid(0.1 + 0.2));
  EXPECT_FALSE(p.on_grid(0.25));
  EXPECT_EQ(p.nearest_index(0.26), 3);
  EXPECT_EQ(p.nearest_index(7.0), 10);
  EXPECT_DOUBLE_EQ(p.normalize(0.5), 0.5);
}

TEST(ContextSchema, AcceptedValuesAreGridAligned) {
  const auto s = aeq::web_server_schema();
  aeq::Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto x = oracle::random_valid(s, rng);
    for (std::size_t k = 0; k < s.arity(); ++k) {
      const auto& p = s.properties()[k];
      const double steps = (x.values[k] - p.lower) / p.step;
      EXPECT_NEAR(steps, std::round(steps), 1e-9);
    }
  }
}

TEST(ContextSchema, KeyIsInjectiveOnGrid) {
  const auto s = small_schema({});
  std::set<std::uint64_t> keys;
  for (double a = 1; a <= 4; ++a)
    for (double b = 1; b <= 4; ++b) keys.insert(s.key({{a, b}}));
  EXPECT_EQ(keys.size(), 16u);
}

TEST(ContextSchema, SnapClampsAndRounds) {
  const auto s = aeq::web_server_schema();
  const auto x = s.snap({{1200.4, 3.6, 0.44}});
  EXPECT_EQ(x.values, (std::vector<double>{1000, 4, 0.4}));
}

TEST(SpaceSize, Unconstrained) {
  const ContextSchema s({{"a", PropertyKind::Integer, 1, 1000, 1},
                         {"b", PropertyKind::Integer, 1, 10, 1},
                         {"c", PropertyKind::Integer, 1, 500, 1}},
                        {});
  EXPECT_EQ(aeq::context_space_size(s, SpaceMode::Unconstrained), BigCount(5'000'000));

  const ContextSchema flag({{"f", PropertyKind::Integer, 0, 1, 1}}, {});
  EXPECT_EQ(aeq::context_space_size(flag, SpaceMode::Unconstrained), BigCount(2));
}

TEST(SpaceSize, ExactMatchesBruteForce) {
  EXPECT_EQ(aeq::context_space_size(small_schema(), SpaceMode::Exact), BigCount(10));
  EXPECT_EQ(oracle::count_valid(small_schema()), 10u);
}

TEST(SpaceSize, ExactNeverExceedsUnconstrained) {
  const std::vector<std::vector<std::string>> cases{
      {}, {"p2 <= p1"}, {"p1 + p2 = 5"}, {"IF p1 > 2 THEN p2 < 2"}, {"p1 * p2 >= 4", "p1 >= 2"}};
  for (const auto& c : cases) {
    const auto s = small_schema(c);
    const auto exact = aeq::context_space_size(s, SpaceMode::Exact);
    const auto all = aeq::context_space_size(s, SpaceMode::Unconstrained);
    EXPECT_LE(exact, all);
    EXPECT_EQ(exact, BigCount(oracle::count_valid(s)));
    EXPECT_EQ(exact == all, oracle::count_valid(s) == 16u);
  }
}

TEST(SpaceSize, ExactHonoursCap) {
  try {
    aeq::context_space_size(aeq::web_server_schema(), SpaceMode::Exact, 1000);
    FAIL();
  } catch (const aeq::Error& e) {
    EXPECT_EQ(e.category(), aeq::ErrorCategory::Capacity);
  }
}

TEST(SpaceSize, FlowSpace) {
  EXPECT_EQ(aeq::flow_space_size(BigCount(2), 3), BigCount(8));
  EXPECT_EQ(aeq::flow_space_size(BigCount(10), 2), BigCount(100));
  EXPECT_EQ(aeq::flow_space_size(BigCount(1'000'000), 2), BigCount(1'000'000'000'000ULL));
  // far past 64 bits, no wrap-around
  const BigCount big = aeq::flow_space_size(aeq::web_server_schema(), 60);
  EXPECT_EQ(big, boost::multiprecision::pow(BigCount(11'000'000), 60));
}

TEST(ContextFlow, MakeFlowValidates) {
  const auto s = aeq::web_server_schema();
  EXPECT_NO_THROW(aeq::make_flow(s, "ok", {{{12, 3, 0.5}}}));
  try {
    aeq::make_flow(s, "bad", {{{12, 3, 0.5}}, {{5, 100, 1}}});
    FAIL();
  } catch (const aeq::Error& e) {
    EXPECT_EQ(e.category(), aeq::ErrorCategory::Constraint);
  }
  try {
    aeq::make_flow(s, "empty", {});
    FAIL();
  } catch (const aeq::Error& e) {
    EXPECT_EQ(e.category(), aeq::ErrorCategory::Precondition);
  }
}

}  // namespace
