#include <gtest/gtest.h>

#include "fedopt/units.hpp"

using namespace fedopt;

TEST(Units, DbmToWatts) {
  EXPECT_DOUBLE_EQ(dbm_to_watts(0.0), 1e-3);
  EXPECT_NEAR(dbm_to_watts(-100.0), 1e-13, 1e-27);
  EXPECT_NEAR(dbm_to_watts(30.0), 1.0, 1e-12);
}

TEST(Units, DbToLinear) {
  EXPECT_DOUBLE_EQ(db_to_linear(0.0), 1.0);
  EXPECT_NEAR(db_to_linear(-30.0), 1e-3, 1e-15);
  EXPECT_NEAR(db_to_linear(10.0), 10.0, 1e-12);
}

TEST(Units, ParseQuantityPlainNumbers) {
  EXPECT_DOUBLE_EQ(parse_quantity("2.5"), 2.5);
  EXPECT_DOUBLE_EQ(parse_quantity("-3e-4"), -3e-4);
}

TEST(Units, ParseQuantitySuffixes) {
  EXPECT_DOUBLE_EQ(parse_quantity("2 MHz"), 2e6);
  EXPECT_DOUBLE_EQ(parse_quantity("1 GHz"), 1e9);
  EXPECT_DOUBLE_EQ(parse_quantity("100 mW"), 0.1);
  EXPECT_DOUBLE_EQ(parse_quantity("2 Mbit"), 2e6);
  EXPECT_DOUBLE_EQ(parse_quantity("30 s"), 30.0);
  EXPECT_DOUBLE_EQ(parse_quantity("1.5 km"), 1500.0);
  EXPECT_DOUBLE_EQ(parse_quantity("4.9 GFLOP"), 4.9e9);
  EXPECT_NEAR(parse_quantity("-100 dBm"), 1e-13, 1e-27);
  EXPECT_NEAR(parse_quantity("-30 dB"), 1e-3, 1e-15);
}

TEST(Units, ParseQuantityErrors) {
  EXPECT_THROW(parse_quantity("fast"), std::invalid_argument);
  EXPECT_THROW(parse_quantity("3 parsecs"), std::invalid_argument);
}
