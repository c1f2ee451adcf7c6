#include <gtest/gtest.h>

#include <random>

#include "tsim/chrono.hpp"

using namespace tsim;

namespace {

PhysioTime pt(std::uint64_t ts, std::uint64_t step, CoreId core = 0, std::uint64_t seq = 0) {
  return PhysioTime{Timestamp{ts}, step, TieBreak{core, seq}};
}

}  // namespace

TEST(Physio, LogicalTimeDominates) {
  EXPECT_TRUE(physio_less(pt(6, 1), pt(11, 1)));
  EXPECT_FALSE(physio_less(pt(11, 1), pt(6, 1)));
  EXPECT_TRUE(physio_less(pt(6, 100), pt(11, 1)));
}

TEST(Physio, StepBreaksTimestampTies) {
  EXPECT_TRUE(physio_less(pt(0, 2), pt(0, 3)));
  EXPECT_FALSE(physio_less(pt(0, 3), pt(0, 2)));
}

TEST(Physio, Irreflexive) { EXPECT_FALSE(physio_less(pt(5, 9, 1, 4), pt(5, 9, 1, 4))); }

TEST(Physio, TieBreakOnlyWhenTsAndStepCoincide) {
  EXPECT_TRUE(physio_less(pt(5, 9, 0, 7), pt(5, 9, 1, 0)));
  EXPECT_TRUE(physio_coincide(pt(5, 9, 0, 7), pt(5, 9, 1, 0)));
  EXPECT_FALSE(physio_coincide(pt(5, 9), pt(5, 10)));
}

TEST(Timestamp, Arithmetic) {
  Timestamp t{10};
  EXPECT_EQ((t + 5).value, 15u);
  EXPECT_EQ(t.next().value, 11u);
  EXPECT_LT(Timestamp{3}, Timestamp{4});
}

// Random triples drawn from a tiny domain so that ties are common.
TEST(PhysioProperty, StrictTotalOrder) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> small(0, 3);
  auto draw = [&] { return pt(small(rng), small(rng), small(rng) % 2, small(rng)); };
  for (int i = 0; i < 20000; ++i) {
    const auto a = draw(), b = draw(), c = draw();
    EXPECT_FALSE(physio_less(a, a));
    if (physio_less(a, b)) {
      EXPECT_FALSE(physio_less(b, a));
    }
    if (physio_less(a, b) && physio_less(b, c)) {
      EXPECT_TRUE(physio_less(a, c));
    }
    if (!(a == b)) {
      EXPECT_TRUE(physio_less(a, b) || physio_less(b, a));
    }
  }
}
