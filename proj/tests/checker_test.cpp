#include <gtest/gtest.h>

#include "tsim/checker.hpp"
#include "tsim/errors.hpp"

using namespace tsim;

namespace {

TraceEntry op(CoreId core, std::uint64_t seq, OpClass kind, Addr addr, ValueToken v, std::uint64_t ts,
              std::uint64_t pt) {
  TraceEntry e;
  e.core = core;
  e.seq = seq;
  e.kind = kind;
  e.addr = addr;
  e.value = v;
  e.ts = Timestamp{ts};
  e.pt = pt;
  return e;
}

constexpr Addr A = 0, B = 1;
const ValueToken a1{0, 0, 1};
const ValueToken b1{1, 0, 1};

// Trace of the fig2 builtin as the engine commits it.
ExecTrace fig2_trace() {
  const ValueToken sB{0, 0, 1}, sA{1, 0, 2};
  return {
      op(0, 0, OpClass::Store, B, sB, 11, 1),
      op(0, 1, OpClass::Load, B, sB, 0, 3),
      op(0, 2, OpClass::Load, A, ValueToken::initial(A), 0, 5),
      op(1, 0, OpClass::Store, A, sA, 6, 2),
      op(1, 1, OpClass::Fence, 0, {}, 6, 4),
      op(1, 2, OpClass::Load, B, ValueToken::initial(B), 6, 6),
  };
}

}  // namespace

TEST(CheckTrace, Fig2OkUnderTsoNotSc) {
  EXPECT_TRUE(check_trace(fig2_trace(), MemoryModel::TSO).empty());
  const auto v = check_trace(fig2_trace(), MemoryModel::SC);
  ASSERT_FALSE(v.empty());
  bool found = false;
  for (const auto& x : v)
    if (x.rule == "SC1" && x.ops == std::vector<std::size_t>{0, 1}) found = true;
  EXPECT_TRUE(found) << describe(v.front());
}

TEST(CheckTrace, Fig1OkUnderSc) {
  const ExecTrace t = {
      op(0, 0, OpClass::Store, A, a1, 1, 1),
      op(0, 1, OpClass::Load, B, ValueToken::initial(B), 1, 2),
      op(1, 0, OpClass::Store, B, b1, 12, 3),
      op(1, 1, OpClass::Load, A, a1, 12, 4),
  };
  EXPECT_TRUE(check_trace(t, MemoryModel::SC).empty());
}

TEST(CheckTrace, CorruptedLoadValue) {
  ExecTrace t = {
      op(0, 0, OpClass::Store, A, a1, 5, 1),
      op(1, 0, OpClass::Load, A, a1, 2, 2),
  };
  const auto v = check_trace(t, MemoryModel::SC);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "SC2");
  EXPECT_EQ(v[0].ops.front(), 1u);
}

TEST(CheckTrace, OwnStoreVisibleOutsideSc) {
  // Store sits in the buffer (later logical time) but the load forwards it.
  ExecTrace t = {
      op(0, 0, OpClass::Store, A, a1, 9, 3),
      op(0, 1, OpClass::Load, A, a1, 0, 1),
  };
  EXPECT_TRUE(check_trace(t, MemoryModel::TSO).empty());
  EXPECT_FALSE(check_trace(t, MemoryModel::SC).empty());
}

TEST(CheckTrace, MalformedTraces) {
  ExecTrace clash = {
      op(0, 0, OpClass::Store, A, a1, 3, 1),
      op(1, 0, OpClass::Store, A, b1, 3, 1),
  };
  EXPECT_THROW(check_trace(clash, MemoryModel::TSO), TraceError);
  ExecTrace unordered = {
      op(0, 1, OpClass::Load, A, a1, 3, 1),
      op(0, 0, OpClass::Load, A, a1, 3, 2),
  };
  EXPECT_THROW(check_trace(unordered, MemoryModel::TSO), TraceError);
}

TEST(CheckTrace, DependencyEdge) {
  TraceEntry st = op(0, 1, OpClass::Store, B, a1, 2, 4);
  st.dep = 0;
  ExecTrace t = {op(0, 0, OpClass::Load, A, ValueToken::initial(A), 5, 1), st};
  // Load -> store is ordered even under RC when the store consumes the load.
  const auto v = check_trace(t, MemoryModel::RC);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "RC1");
}

TEST(PoOrdered, EdgeTables) {
  using K = OpClass;
  EXPECT_FALSE(po_ordered(MemoryModel::TSO, K::Store, K::Load));
  EXPECT_TRUE(po_ordered(MemoryModel::TSO, K::Store, K::Store));
  EXPECT_TRUE(po_ordered(MemoryModel::TSO, K::Store, K::Fence));
  EXPECT_FALSE(po_ordered(MemoryModel::PSO, K::Store, K::Store));
  EXPECT_TRUE(po_ordered(MemoryModel::PSO, K::Load, K::Store));
  EXPECT_TRUE(po_ordered(MemoryModel::PSO, K::Load, K::Fence));
  EXPECT_FALSE(po_ordered(MemoryModel::RC, K::Load, K::Load));
  EXPECT_TRUE(po_ordered(MemoryModel::RC, K::Store, K::Release));
  EXPECT_FALSE(po_ordered(MemoryModel::RC, K::Release, K::Load));
  EXPECT_TRUE(po_ordered(MemoryModel::RC, K::Acquire, K::Load));
  EXPECT_FALSE(po_ordered(MemoryModel::RC, K::Load, K::Acquire));
  EXPECT_TRUE(po_ordered(MemoryModel::RC, K::Release, K::Acquire));
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) EXPECT_TRUE(po_ordered(MemoryModel::SC, K(a), K(b)));
}

// Edges nest from SC down to RC.
TEST(PoOrdered, Nesting) {
  const MemoryModel order[] = {MemoryModel::SC, MemoryModel::TSO, MemoryModel::PSO, MemoryModel::RC};
  for (int i = 0; i + 1 < 4; ++i)
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b)
        if (po_ordered(order[i + 1], OpClass(a), OpClass(b))) {
          EXPECT_TRUE(po_ordered(order[i], OpClass(a), OpClass(b)));
        }
}

TEST(Oracle, DekkerSets) {
  const Program p = builtin("listing1");
  EXPECT_EQ(oracle_outcomes(p, MemoryModel::SC), (std::set<Outcome>{{0, 1}, {1, 0}, {1, 1}}));
  EXPECT_EQ(oracle_outcomes(p, MemoryModel::TSO), (std::set<Outcome>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
}

TEST(Oracle, FencesRestoreSc) {
  const Program p = builtin("dekker_fenced");
  EXPECT_EQ(oracle_outcomes(p, MemoryModel::TSO), oracle_outcomes(p, MemoryModel::SC));
}

TEST(Oracle, SingleCoreOneOutcome) {
  for (auto m : {MemoryModel::SC, MemoryModel::TSO, MemoryModel::PSO, MemoryModel::RC})
    EXPECT_EQ(oracle_outcomes(builtin("single_core"), m).size(), 1u);
}

TEST(Oracle, LoadBufferingOnlyUnderRc) {
  const Program p = builtin("lb");
  EXPECT_FALSE(oracle_outcomes(p, MemoryModel::PSO).count({1, 1}));
  EXPECT_TRUE(oracle_outcomes(p, MemoryModel::RC).count({1, 1}));
  // With data dependencies values cannot appear out of thin air.
  for (const auto& o : oracle_outcomes(builtin("lb_dep"), MemoryModel::RC)) {
    EXPECT_FALSE(o[0] > 0 && o[1] > 0);
  }
}

TEST(Oracle, Limits) {
  EXPECT_THROW(oracle_outcomes(builtin("spin"), MemoryModel::SC), BudgetError);
}

TEST(InvariantScan, FlagsStoreInsideSnapshot) {
  ExecTrace t = {op(0, 0, OpClass::Store, A, a1, 5, 3)};
  AuditLog log;
  log.snapshots.push_back(SnapshotObs{A, 1, Timestamp{0}, Timestamp{10}, ValueToken::initial(A), 1});
  const auto v = scan_lemmas(t, log);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "snapshot-window");

  AuditLog ok;
  ok.snapshots.push_back(SnapshotObs{A, 1, Timestamp{0}, Timestamp{4}, ValueToken::initial(A), 1});
  ok.masters.push_back(MasterObs{A, Timestamp{5}, Timestamp{5}, a1, 3});
  EXPECT_TRUE(scan_lemmas(t, ok).empty());
}

TEST(InvariantScan, StaleMasterAndWrongWts) {
  ExecTrace t = {op(0, 0, OpClass::Store, A, a1, 5, 3)};
  AuditLog log;
  log.masters.push_back(MasterObs{A, Timestamp{0}, Timestamp{9}, ValueToken::initial(A), 4});
  log.masters.push_back(MasterObs{A, Timestamp{6}, Timestamp{9}, a1, 5});
  const auto v = scan_lemmas(t, log);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].rule, "stale-master");
  EXPECT_EQ(v[1].rule, "version-origin");
}
