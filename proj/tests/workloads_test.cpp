#include <gtest/gtest.h>

#include "tsim/engine.hpp"
#include "tsim/errors.hpp"
#include "tsim/workloads.hpp"

using namespace tsim;

TEST(Parse, OpsAndSections) {
  const Program p = parse_program(R"(
# comment
[init]
X wts=2 rts=7 cores=1
[core 0]
St X = 3
loop:
Ld Y -> r2
Blt r2 1 loop
[core 1]
Ld X -> r1
St Y = r1 + 4
Fence
Acq
Rel
Sleep 5
SpinUntil Y == 7
Jmp end
end:
)");
  ASSERT_EQ(p.num_cores(), 2);
  EXPECT_EQ(p.cores[0].size(), 3u);
  EXPECT_EQ(p.cores[0][0].kind, OpKind::Store);
  EXPECT_EQ(p.cores[0][0].imm, 3);
  EXPECT_EQ(p.cores[1][1].src, 1);
  EXPECT_EQ(p.cores[1][1].imm, 4);
  EXPECT_EQ(p.addr_name(0), "X");
  ASSERT_EQ(p.init.size(), 1u);
  EXPECT_FALSE(p.straight_line());
  EXPECT_EQ(p.observed.size(), 2u);
  EXPECT_EQ(p.reg_label(p.observed[0]), "c0.r2");
}

TEST(Parse, RoundTrip) {
  for (const auto& name : builtin_names()) {
    const Program p = builtin(name);
    const Program q = parse_program(format_program(p), name);
    EXPECT_EQ(format_program(q), format_program(p)) << name;
  }
}

TEST(Parse, Errors) {
  EXPECT_THROW(parse_program("[core 0]\nFrobnicate A\n"), ConfigError);
  EXPECT_THROW(parse_program("[core 0]\nLd A -> r99\n"), ConfigError);
  EXPECT_THROW(parse_program("[core 0]\nJmp nowhere\n"), ConfigError);
  EXPECT_THROW(builtin("no_such_program"), ConfigError);
}

TEST(Builtins, Fig1Shape) {
  const Program p = builtin("fig1");
  EXPECT_EQ(p.ordering_ops(), 4u);
  EXPECT_EQ(p.schedule, (std::vector<CoreId>{0, 0, 1, 1}));
  EXPECT_TRUE(p.straight_line());
}

TEST(Builtins, SpinLoopsOnDone) {
  const Program p = builtin("spin");
  ASSERT_EQ(p.num_cores(), 2);
  EXPECT_FALSE(p.straight_line());
  bool branch = false;
  for (const auto& op : p.cores[0]) branch |= op.kind == OpKind::BranchLt;
  EXPECT_TRUE(branch);
  EXPECT_EQ(p.cores[1].back().kind, OpKind::Store);
}

TEST(Builtins, LeaseCaseBothCoresLoop) {
  const Program p = lease_case_program(10);
  ASSERT_EQ(p.num_cores(), 2);
  EXPECT_EQ(p.cores[0].size(), p.cores[1].size());
  EXPECT_EQ(p.ordering_ops(), 2u * 10 * 4);
}

TEST(Builtins, LitmusCorpusSmall) {
  EXPECT_GE(litmus_names().size(), 12u);
  for (const auto& n : litmus_names()) {
    const Program p = builtin(n);
    EXPECT_TRUE(p.straight_line()) << n;
    EXPECT_LE(p.ordering_ops(), 8u) << n;
  }
}

TEST(Synth, Deterministic) {
  SynthParams sp;
  sp.seed = 77;
  EXPECT_EQ(format_program(synth(sp)), format_program(synth(sp)));
  SynthParams other = sp;
  other.seed = 78;
  EXPECT_NE(format_program(synth(sp)), format_program(synth(other)));
  SynthParams bad;
  bad.write_fraction = 2;
  EXPECT_THROW(synth(bad), ConfigError);
}

TEST(Synth, ReadOnlyHasNoOwnershipTransfer) {
  SynthParams sp;
  sp.write_fraction = 0;
  sp.dependent_fraction = 0;
  sp.seed = 4;
  sp.ops_per_core = 1500;
  sp.lines = 32;
  EngineConfig c;
  c.proto.mesi = true;
  c.proto.log_messages = true;
  const auto r = run(c, synth(sp), 1);
  EXPECT_EQ(r.traffic.count(MsgKind::StoreReq), 0u);
  // Exclusive copies get downgraded once while sharing is discovered;
  // after that nothing changes hands.
  const std::uint64_t half = r.trace.size() / 2;
  std::uint64_t late = 0;
  for (const auto& m : r.messages)
    if (m.msg.kind == MsgKind::WritebackReq && m.step > half) ++late;
  EXPECT_EQ(late, 0u);
}

TEST(Synth, SingleCoreNeverRenewsUnderMesi) {
  SynthParams sp;
  sp.cores = 1;
  sp.ops_per_core = 2000;
  sp.lines = 256;
  EngineConfig c;
  c.proto.mesi = true;
  const auto r = run(c, synth(sp), 1);
  EXPECT_EQ(r.metrics.renew_requests, 0u);
}

TEST(Synth, HotLinesStressBothProtocols) {
  SynthParams sp;
  sp.cores = 64;
  sp.ops_per_core = 60;
  sp.hot_lines = 2;
  sp.hot_fraction = 0.6;
  sp.private_fraction = 0.1;
  sp.lines = 256;
  const Program p = synth(sp);
  EngineConfig t;
  EXPECT_GT(run(t, p, 1).traffic.by_class(TrafficClass::Renew).messages, 0u);
  EngineConfig d;
  d.protocol = ProtocolKind::Directory;
  EXPECT_GT(run(d, p, 1).traffic.by_class(TrafficClass::Invalidation).messages, 0u);
}
