#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "tsim/checker.hpp"
#include "tsim/engine.hpp"

using namespace tsim;

namespace {

constexpr MemoryModel kModels[] = {MemoryModel::SC, MemoryModel::TSO, MemoryModel::PSO, MemoryModel::RC};

// Small random straight-line program: 2-3 cores, at most `max_ops` ordering
// ops over two or three addresses.
std::string random_litmus(std::mt19937_64& rng, std::size_t max_ops, bool fence_everything = false) {
  const int cores = 2 + static_cast<int>(rng() % 2);
  const char* addrs[] = {"A", "B", "C"};
  const int naddr = 2 + static_cast<int>(rng() % 2);
  std::vector<std::vector<std::string>> body(cores);
  std::size_t ops = 0;
  int reg = 1;
  const std::size_t target = 3 + rng() % (max_ops - 2);
  while (ops < target) {
    const int c = static_cast<int>(rng() % cores);
    const std::string a = addrs[rng() % naddr];
    const int pick = static_cast<int>(rng() % 10);
    std::vector<std::string>& b = body[c];
    if (pick < 4) {
      b.push_back("Ld " + a + " -> r" + std::to_string(reg++));
    } else if (pick < 7) {
      b.push_back("St " + a + " = " + std::to_string(1 + rng() % 3));
    } else if (pick < 8 && reg > 1) {
      b.push_back("St " + a + " = r" + std::to_string(1 + rng() % (reg - 1)) + " + 1");
    } else if (pick < 9) {
      b.push_back(rng() % 2 ? "Acq" : "Rel");
    } else {
      b.push_back("Fence");
    }
    ++ops;
    if (fence_everything && ops < target) {
      b.push_back("Fence");
      ++ops;
    }
  }
  std::ostringstream os;
  for (int c = 0; c < cores; ++c) {
    os << "[core " << c << "]\n";
    for (const auto& l : body[c]) os << l << '\n';
  }
  return os.str();
}

bool subset(const std::set<Outcome>& a, const std::set<Outcome>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST(Soundness, RandomLitmusEngineWithinOracle) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 150; ++i) {
    const std::string text = random_litmus(rng, 8);
    Program p;
    try {
      p = parse_program(text, "rand");
    } catch (...) {
      continue;  // a register read before any load in that core
    }
    std::set<Outcome> prev_oracle, prev_engine;
    for (std::size_t m = 0; m < 4; ++m) {
      EngineConfig cfg;
      cfg.model = kModels[m];
      cfg.proto.mesi = (i % 2) == 0;
      cfg.proto.static_lease = 1 + static_cast<std::uint32_t>(rng() % 10);
      const auto oracle = oracle_outcomes(p, kModels[m]);
      const auto e = enumerate(cfg, p);
      EXPECT_TRUE(e.violations.empty()) << text << e.violations.front();
      EXPECT_TRUE(subset(e.outcomes, oracle)) << to_string(kModels[m]) << "\n" << text;
      EXPECT_FALSE(e.outcomes.empty());
      if (m > 0) {
        EXPECT_TRUE(subset(prev_oracle, oracle)) << text;
      }
      prev_oracle = oracle;
      prev_engine = e.outcomes;
    }
  }
}

TEST(Soundness, FencedTsoMatchesSc) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    const std::string text = random_litmus(rng, 8, true);
    Program p;
    try {
      p = parse_program(text, "fenced");
    } catch (...) {
      continue;
    }
    if (p.ordering_ops() > kOracleOpLimit) continue;
    EXPECT_EQ(oracle_outcomes(p, MemoryModel::TSO), oracle_outcomes(p, MemoryModel::SC)) << text;
  }
}

TEST(Soundness, RandomRunsPassCheckerAndAudit) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 60; ++i) {
    SynthParams sp;
    sp.cores = 2 + static_cast<int>(rng() % 7);
    sp.ops_per_core = 80;
    sp.lines = 16 + static_cast<std::uint32_t>(rng() % 48);
    sp.hot_lines = 1 + static_cast<std::uint32_t>(rng() % 4);
    sp.seed = rng();
    EngineConfig cfg;
    cfg.model = kModels[rng() % 4];
    cfg.protocol = rng() % 4 == 0 ? ProtocolKind::Directory : ProtocolKind::Tardis;
    cfg.proto.mesi = rng() % 2;
    cfg.proto.lease_predictor = rng() % 2;
    cfg.livelock_detector = rng() % 2;
    cfg.store_buffer = rng() % 4 != 0;
    cfg.proto.audit = true;
    cfg.proto.geometry.l1_kb = 1;  // force evictions
    cfg.proto.geometry.llc_kb = 2;
    cfg.proto.geometry.llc_ways = 4;
    const auto r = run(cfg, synth(sp), rng());
    const auto v = check_trace(r.trace, cfg.model);
    EXPECT_TRUE(v.empty()) << describe(v.front());
    EXPECT_TRUE(r.audit.violations.empty()) << r.audit.violations.front();
    if (cfg.protocol == ProtocolKind::Tardis) {
      const auto l = scan_lemmas(r.trace, r.audit);
      EXPECT_TRUE(l.empty()) << describe(l.front());
    }
  }
}
