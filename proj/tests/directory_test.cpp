#include <gtest/gtest.h>

#include "tsim/directory.hpp"

using namespace tsim;

namespace {

ProtocolParams params(int cores = 4) {
  ProtocolParams p;
  p.cores = cores;
  p.audit = true;
  return p;
}

}  // namespace

TEST(Directory, StoreInvalidatesEverySharer) {
  DirectoryProtocol d(params());
  CoreClock c;
  for (CoreId k = 1; k <= 3; ++k) d.load(k, 7, c, nullptr, k);
  ASSERT_EQ(d.dir_entry(7)->state, DirState::Shared);
  EXPECT_EQ(d.dir_entry(7)->sharer_count(), 3);
  const auto& ledger = d.network().ledger();
  const auto inv0 = ledger.count(MsgKind::InvReq);
  const auto ack0 = ledger.count(MsgKind::InvAck);
  d.store(0, 7, ValueToken{0, 0, 1}, c, Timestamp{}, 10);
  EXPECT_EQ(ledger.count(MsgKind::InvReq) - inv0, 3u);
  EXPECT_EQ(ledger.count(MsgKind::InvAck) - ack0, 3u);
  EXPECT_EQ(d.dir_entry(7)->state, DirState::Exclusive);
  for (CoreId k = 1; k <= 3; ++k) EXPECT_EQ(d.l1_line(k, 7), nullptr);
  EXPECT_TRUE(d.audit().violations.empty());
}

TEST(Directory, UncachedLoadGetsExclusive) {
  DirectoryProtocol d(params());
  CoreClock c;
  const auto r = d.load(0, 3, c, nullptr, 1);
  EXPECT_EQ(r.ts, Timestamp{0});
  EXPECT_EQ(d.l1_line(0, 3)->state, L1State::E);
  EXPECT_EQ(d.dir_entry(3)->state, DirState::Exclusive);
}

TEST(Directory, OwnerDowngradedOnRemoteLoad) {
  DirectoryProtocol d(params());
  CoreClock c;
  d.store(0, 3, ValueToken{0, 0, 4}, c, Timestamp{}, 1);
  const auto r = d.load(1, 3, c, nullptr, 2);
  EXPECT_EQ(r.value.data, 4);
  EXPECT_EQ(d.l1_line(0, 3)->state, L1State::S);
  EXPECT_EQ(d.dir_entry(3)->state, DirState::Shared);
  EXPECT_TRUE(d.audit().violations.empty());
}

TEST(Directory, NeverRenews) {
  DirectoryProtocol d(params(2));
  CoreClock c;
  for (std::uint64_t i = 0; i < 300; ++i) {
    const CoreId k = static_cast<CoreId>(i % 2);
    if (i % 4 == 0) {
      d.store(k, i % 6, ValueToken{k, i, 1}, c, Timestamp{}, i);
    } else {
      d.load(k, i % 6, c, nullptr, i);
    }
  }
  EXPECT_EQ(d.network().ledger().by_class(TrafficClass::Renew).messages, 0u);
  EXPECT_EQ(d.stats().renew_requests, 0u);
  EXPECT_TRUE(d.audit().violations.empty());
}
