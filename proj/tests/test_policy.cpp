#include <gtest/gtest.h>

#include "epinet/error.hpp"
#include "epinet/policy.hpp"

using namespace epinet;

TEST(Schedule, ThresholdShape) {
  const Schedule s = Schedule::threshold(2.0, 0.3, 10.0);
  EXPECT_DOUBLE_EQ(s.value(0.0), 0.3);
  EXPECT_DOUBLE_EQ(s.value(1.999), 0.3);
  EXPECT_DOUBLE_EQ(s.value(2.0), 0.0);
  EXPECT_DOUBLE_EQ(s.integral(5.0), 0.6);
  EXPECT_DOUBLE_EQ(s.integral(1.0), 0.3);
  EXPECT_DOUBLE_EQ(s.next_change(0.5), 2.0);
  EXPECT_DOUBLE_EQ(s.next_change(2.0), 10.0);
  EXPECT_FALSE(s.zero_from(1.0));
  EXPECT_TRUE(s.zero_from(2.0));
}

TEST(Schedule, DegenerateThresholds) {
  EXPECT_DOUBLE_EQ(Schedule::threshold(0.0, 0.3, 10.0).max_value(), 0.0);
  EXPECT_DOUBLE_EQ(Schedule::threshold(12.0, 0.3, 10.0).value(9.99), 0.3);
  EXPECT_THROW(Schedule::threshold(-1.0, 0.3, 10.0), ValidationError);
}

TEST(Schedule, FromStepsMergesRuns) {
  const std::vector<double> v{0.2, 0.2, 0.0, 0.0, 0.1};
  const Schedule s = Schedule::from_steps(v, 0.5, 2.5);
  ASSERT_EQ(s.breakpoints().size(), 3u);
  EXPECT_DOUBLE_EQ(s.breakpoints()[1], 1.0);
  EXPECT_DOUBLE_EQ(s.breakpoints()[2], 2.0);
  EXPECT_DOUBLE_EQ(s.integral(2.5), 0.2 + 0.05);
}

TEST(Schedule, Validation) {
  EXPECT_THROW(Schedule({0.0, 1.0, 1.0}, {0.1, 0.2, 0.0}, 5.0), ValidationError);
  EXPECT_THROW(Schedule({0.5}, {0.1}, 5.0), ValidationError);
  EXPECT_THROW(Schedule({0.0, 6.0}, {0.1, 0.0}, 5.0), ValidationError);
  EXPECT_THROW(Schedule({0.0}, {-0.1}, 5.0), ValidationError);
  EXPECT_THROW(Schedule::constant(0.5, 5.0).validate(0.3), ValidationError);
}
