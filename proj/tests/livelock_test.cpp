#include <gtest/gtest.h>

#include "tsim/livelock.hpp"

using namespace tsim;

TEST(Ahb, FiresOnHundredthConsecutiveHit) {
  LivelockDetector d;
  EXPECT_FALSE(d.on_shared_load(42));  // allocation, not a hit
  for (int i = 1; i < 100; ++i) EXPECT_FALSE(d.on_shared_load(42)) << i;
  EXPECT_TRUE(d.on_shared_load(42));
  EXPECT_EQ(d.entries()[0].access_count, 0u);
}

TEST(Ahb, NewAddressAllocates) {
  LivelockDetector d;
  EXPECT_FALSE(d.on_shared_load(5));
  ASSERT_EQ(d.entries().size(), 1u);
  EXPECT_EQ(d.entries()[0].addr, 5u);
}

TEST(Ahb, NineAddressesNeverSaturateEightEntries) {
  LivelockDetector d;
  for (int round = 0; round < 2000; ++round)
    for (Addr a = 0; a < 9; ++a) EXPECT_FALSE(d.on_shared_load(a));
  for (const auto& e : d.entries()) EXPECT_LE(e.access_count, 1u);
}

TEST(Threshold, UpdateResetsToMinimum) {
  LivelockDetector d;
  for (int i = 0; i < 30; ++i) d.on_check_response(false);
  EXPECT_EQ(d.thresh_count(), 800u);
  d.on_check_response(true);
  EXPECT_EQ(d.thresh_count(), 100u);
}

TEST(Threshold, TenMissesDouble) {
  LivelockDetector d;
  for (int i = 0; i < 9; ++i) d.on_check_response(false);
  EXPECT_EQ(d.thresh_count(), 100u);
  d.on_check_response(false);
  EXPECT_EQ(d.thresh_count(), 200u);
}

TEST(Threshold, CappedTrajectory) {
  LivelockDetector d;
  std::vector<std::uint32_t> seen{d.thresh_count()};
  for (int i = 0; i < 40; ++i) {
    d.on_check_response(false);
    if (d.thresh_count() != seen.back()) seen.push_back(d.thresh_count());
  }
  EXPECT_EQ(seen, (std::vector<std::uint32_t>{100, 200, 400, 800}));
}

TEST(Reset, ClearsCounts) {
  LivelockDetector d;
  for (int i = 0; i < 57; ++i) d.on_shared_load(1);
  for (int i = 0; i < 3; ++i) d.on_shared_load(2);
  d.reset_on_lts_advance();
  for (const auto& e : d.entries()) EXPECT_EQ(e.access_count, 0u);
  LivelockDetector empty;
  empty.reset_on_lts_advance();
  EXPECT_TRUE(empty.entries().empty());
}

TEST(Reset, FiringNeedsFreshRunAfterReset) {
  LivelockDetector d;
  for (int i = 0; i < 100; ++i) d.on_shared_load(1);
  d.reset_on_lts_advance();
  EXPECT_FALSE(d.on_shared_load(1));
}
