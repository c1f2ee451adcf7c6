#include <gtest/gtest.h>

#include <random>

#include "tsim/consistency.hpp"
#include "tsim/errors.hpp"

using namespace tsim;

namespace {
Timestamp T(std::uint64_t v) { return Timestamp{v}; }
}  // namespace

TEST(Load, TsoCleanLineLeavesLts) {
  CoreClock c(MemoryModel::TSO);
  EXPECT_EQ(commit_load(c, T(0), T(5), false), T(0));
  EXPECT_EQ(c.lts, T(0));
}

TEST(Load, TsoDirtyBySelfCommitsAtLts) {
  CoreClock c(MemoryModel::TSO);
  EXPECT_EQ(commit_load(c, T(11), T(11), true), T(0));
  EXPECT_EQ(c.lts, T(0));
}

TEST(Load, ScKeepsPts) {
  CoreClock c(MemoryModel::SC);
  c.pts = T(1);
  EXPECT_EQ(commit_load(c, T(0), T(11), false), T(1));
  EXPECT_EQ(c.pts, T(1));
}

TEST(Load, ScRaisesPtsToWts) {
  CoreClock c(MemoryModel::SC);
  c.pts = T(1);
  EXPECT_EQ(commit_load(c, T(4), T(11), false), T(4));
  EXPECT_EQ(c.pts, T(4));
}

TEST(Load, RcUsesAcquireAndTracksMax) {
  CoreClock c(MemoryModel::RC);
  c.acquirets = T(3);
  EXPECT_EQ(commit_load(c, T(7), T(9), false), T(7));
  EXPECT_EQ(c.maxts, T(7));
  EXPECT_EQ(commit_load(c, T(0), T(9), false), T(3));
  EXPECT_EQ(c.maxts, T(7));
}

TEST(Store, TsoRaisesStsOnly) {
  CoreClock c(MemoryModel::TSO);
  EXPECT_EQ(commit_store(c, T(11)), T(11));
  EXPECT_EQ(c.sts, T(11));
  EXPECT_EQ(c.lts, T(0));
}

TEST(Store, ScRaisesPts) {
  CoreClock c(MemoryModel::SC);
  c.pts = T(1);
  EXPECT_EQ(commit_store(c, T(12)), T(12));
  EXPECT_EQ(c.pts, T(12));
}

TEST(Store, PsoMayCommitBelowSts) {
  CoreClock c(MemoryModel::PSO);
  c.lts = T(3);
  c.sts = T(9);
  EXPECT_EQ(commit_store(c, T(4)), T(4));
  EXPECT_EQ(c.sts, T(9));
}

TEST(Fence, TsoPullsLtsUp) {
  CoreClock c(MemoryModel::TSO);
  c.sts = T(6);
  EXPECT_EQ(apply_fence(c), T(6));
  EXPECT_EQ(c.lts, T(6));
  EXPECT_EQ(apply_fence(c), T(6));
  c.lts = T(9);
  c.sts = T(2);
  EXPECT_EQ(apply_fence(c), T(9));
}

TEST(Fence, RejectedOutsideTsoPso) {
  CoreClock sc(MemoryModel::SC);
  EXPECT_THROW(apply_fence(sc), ModelError);
  CoreClock rc(MemoryModel::RC);
  EXPECT_THROW(apply_fence(rc), ModelError);
  CoreClock tso(MemoryModel::TSO);
  EXPECT_THROW(apply_release(tso), ModelError);
  EXPECT_THROW(apply_acquire(tso), ModelError);
}

TEST(ReleaseAcquire, Rc) {
  CoreClock c(MemoryModel::RC);
  c.maxts = T(7);
  c.releasets = T(2);
  EXPECT_EQ(apply_release(c), T(7));
  EXPECT_EQ(c.releasets, T(7));
  EXPECT_EQ(apply_acquire(c), T(7));
  EXPECT_EQ(c.acquirets, T(7));

  CoreClock z(MemoryModel::RC);
  EXPECT_EQ(apply_release(z), T(0));
}

TEST(SelfIncrement, AdvancesReadClock) {
  CoreClock sc(MemoryModel::SC);
  self_increment(sc);
  EXPECT_EQ(sc.pts, T(1));
  CoreClock tso(MemoryModel::TSO);
  self_increment(tso);
  EXPECT_EQ(tso.lts, T(1));
  EXPECT_EQ(tso.read_ts(), T(1));
}

TEST(ParseModel, Names) {
  EXPECT_EQ(parse_model("tso"), MemoryModel::TSO);
  EXPECT_EQ(parse_model("rc"), MemoryModel::RC);
  EXPECT_THROW(parse_model("arm"), ConfigError);
}

// Random op streams: per-core commit timestamps respect the model's
// program-order edges that timestamps alone must guarantee.
TEST(ClockProperty, TsoProgramOrderMonotone) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 500; ++round) {
    CoreClock c(MemoryModel::TSO);
    std::uint64_t last_load = 0, last_store = 0, last_any_load = 0;
    for (int i = 0; i < 40; ++i) {
      const int kind = static_cast<int>(rng() % 3);
      const std::uint64_t w = rng() % 30;
      if (kind == 0) {
        const Timestamp rts = std::max(c.read_ts(), T(w)) + rng() % 10;
        const auto ts = commit_load(c, T(w), rts, false).value;
        EXPECT_GE(ts, last_any_load);
        last_load = last_any_load = ts;
      } else if (kind == 1) {
        const auto ts = commit_store(c, T(w)).value;
        EXPECT_GE(ts, last_load);
        EXPECT_GE(ts, last_store);
        last_store = ts;
      } else {
        const auto ts = apply_fence(c).value;
        EXPECT_GE(ts, last_store);
        last_any_load = last_load = std::max(last_load, ts);
      }
    }
  }
}
