#include <gtest/gtest.h>

#include "tsim/cachemem.hpp"
#include "tsim/errors.hpp"

using namespace tsim;

TEST(SetAssoc, LruVictimOnFifthLine) {
  SetAssocCache<CacheLine> c(4, 4);
  for (Addr a : {0u, 4u, 8u, 12u}) {
    EXPECT_FALSE(c.victim_for(a));
    c.insert(CacheLine{a, L1State::S});
  }
  c.touch(0);
  auto v = c.victim_for(16);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->addr, 4u);
  c.erase(v->addr);
  c.insert(CacheLine{16, L1State::S});
  EXPECT_EQ(c.find(4), nullptr);
  EXPECT_NE(c.find(16), nullptr);
  EXPECT_FALSE(c.victim_for(1));  // other set untouched
}

TEST(SetAssoc, EraseReturnsLine) {
  SetAssocCache<CacheLine> c(2, 2);
  c.insert(CacheLine{3, L1State::M, Timestamp{2}, Timestamp{5}});
  auto out = c.erase(3);
  ASSERT_TRUE(out);
  EXPECT_EQ(out->rts, Timestamp{5});
  EXPECT_FALSE(c.erase(3));
}

TEST(MainMemory, UntouchedReadsInitial) {
  MainMemory m;
  const auto e = m.read(17);
  EXPECT_TRUE(e.value.is_initial());
  EXPECT_EQ(e.value.seq, 17u);
  EXPECT_EQ(e.wts, Timestamp{0});
  m.write(17, MemEntry{ValueToken{1, 0, 9}, Timestamp{12}, Timestamp{12}, 8});
  EXPECT_EQ(m.read(17).rts, Timestamp{12});
}

TEST(Geometry, DefaultsAndValidation) {
  CacheGeometry g;
  EXPECT_EQ(g.l1_sets(), 128u);
  EXPECT_EQ(g.llc_sets(), 512u);
  EXPECT_NO_THROW(g.validate());
  g.l1_ways = 0;
  EXPECT_THROW(g.validate(), ConfigError);
  CacheGeometry odd;
  odd.line_bytes = 48;
  EXPECT_THROW(odd.validate(), ConfigError);
}

TEST(ValueToken, Identity) {
  ValueToken a{0, 3, 7};
  ValueToken b{0, 3, 8};
  EXPECT_TRUE(a.same_store(b));
  EXPECT_FALSE(a == b);
  EXPECT_TRUE(ValueToken::initial(2).is_initial());
}
