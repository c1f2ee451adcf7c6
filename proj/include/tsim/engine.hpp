#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "tsim/consistency.hpp"
#include "tsim/livelock.hpp"
#include "tsim/network.hpp"
#include "tsim/protocol.hpp"
#include "tsim/workloads.hpp"

namespace tsim {

enum class ProtocolKind : std::uint8_t { Tardis, Directory };

std::string_view to_string(ProtocolKind kind);
ProtocolKind parse_protocol(std::string_view text);

struct EngineConfig {
  ProtocolKind protocol = ProtocolKind::Tardis;
  MemoryModel model = MemoryModel::TSO;
  ProtocolParams proto;  // `cores` is taken from the program
  bool store_buffer = true;
  std::size_t sb_capacity = 8;
  bool livelock_detector = false;
  LivelockParams livelock;
  std::uint64_t self_increment_period = 0;  // 0: 100, or 1000 with the detector
  double skip_prob = 0.25;
  std::uint64_t max_cycles = 50'000'000;
  bool record_trace = true;

  std::uint64_t effective_period() const {
    if (self_increment_period) return self_increment_period;
    return livelock_detector ? 1000 : 100;
  }
  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

enum class OpClass : std::uint8_t { Load, Store, Fence, Acquire, Release };

std::string_view to_string(OpClass cls);

/// One committed operation. `seq` is the per-core program-order index of
/// dynamic ordering ops; `dep` is the seq of the load whose register a
/// store's value was computed from (or -1).
struct TraceEntry {
  CoreId core = 0;
  std::uint64_t seq = 0;
  std::size_t pc = 0;
  OpClass kind = OpClass::Load;
  Addr addr = 0;
  ValueToken value;
  Timestamp ts;
  std::uint64_t pt = 0;
  std::int64_t dep = -1;
  AccessPath path = AccessPath::None;

  PhysioTime physio() const { return PhysioTime{ts, pt, TieBreak{core, seq}}; }
  bool is_memory() const { return kind == OpClass::Load || kind == OpClass::Store; }
  bool operator==(const TraceEntry&) const = default;
};

/// Committed ops sorted by (core, seq).
using ExecTrace = std::vector<TraceEntry>;

struct MetricsReport {
  std::string program;
  std::string protocol;
  std::string model;
  bool mesi = true;
  bool lease_predictor = false;
  bool livelock_detector = false;
  bool store_buffer = true;
  std::uint32_t static_lease = 8;
  std::uint64_t self_increment_period = 0;
  std::uint64_t seed = 0;
  int cores = 0;

  std::uint64_t cycles = 0;
  std::uint64_t committed_ops = 0;  // loads + stores
  std::uint64_t llc_accesses = 0;
  std::uint64_t renew_requests = 0;
  std::uint64_t renew_success = 0;
  std::uint64_t renew_failure = 0;
  std::uint64_t checks_sent = 0;
  std::uint64_t checks_updated = 0;
  std::uint64_t self_increments = 0;
  double renew_rate = 0.0;
  std::array<TrafficTotals, kTrafficClasses> traffic{};
  TrafficTotals total_traffic;
  std::uint64_t max_ts = 0;
  double ts_increase_rate = 0.0;
};

struct RunResult {
  ExecTrace trace;
  MetricsReport metrics;
  AuditLog audit;
  ProtocolStats stats;
  TrafficLedger traffic;
  std::vector<LoggedMsg> messages;
  std::vector<std::array<std::int64_t, kNumRegs>> regs;
  Outcome outcome;
  std::vector<std::uint64_t> core_finish;  // cycle at which each core retired its last op
};

/// Timed simulation. Deterministic in (config, program, seed).
/// Throws BudgetError past max_cycles, DeadlockError if no core can move.
RunResult run(const EngineConfig& config, const Program& program, std::uint64_t seed);

struct EnumerateResult {
  std::set<Outcome> outcomes;
  std::uint64_t states = 0;      // distinct states visited
  std::uint64_t terminals = 0;   // terminal traces checked
  std::vector<std::string> violations;  // checker or audit findings
};

inline constexpr std::size_t kEnumerateOpLimit = 10;

/// Exhaustive exploration of every interleaving of core steps and store
/// buffer drains. Each terminal trace is run through the checker.
/// Throws BudgetError for programs over kEnumerateOpLimit ops or with loops.
EnumerateResult enumerate(const EngineConfig& config, const Program& program);

}  // namespace tsim
