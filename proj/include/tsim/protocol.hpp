#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tsim/cachemem.hpp"
#include "tsim/chrono.hpp"

namespace tsim {

/// Knobs shared by both coherence protocols.
struct ProtocolParams {
  int cores = 2;
  CacheGeometry geometry;
  bool mesi = true;
  std::uint32_t static_lease = 8;
  bool lease_predictor = false;
  std::uint32_t hop_latency = 2;
  std::uint32_t l1_latency = 1;
  std::uint32_t llc_latency = 8;
  std::uint32_t dram_latency = 100;
  bool audit = false;
  bool log_messages = false;
};

/// How the memory system served an access.
enum class AccessPath : std::uint8_t { None, Hit, Forward, Miss, RenewOk, RenewFail, CheckSame, CheckUpdated, Upgrade };

std::string_view to_string(AccessPath path);

/// Result of one L1 access as seen by the core.
struct AccessResult {
  ValueToken value;
  Timestamp ts;
  std::uint64_t latency = 0;
  AccessPath path = AccessPath::Hit;
};

/// Initial placement of a line before a run: present in the LLC in shared
/// state with the given timestamps, and in S state in the listed L1s.
struct LinePreset {
  Addr addr = 0;
  Timestamp wts;
  Timestamp rts;
  std::vector<CoreId> sharers;
};

struct ProtocolStats {
  std::uint64_t llc_accesses = 0;
  std::uint64_t renew_requests = 0;
  std::uint64_t renew_success = 0;
  std::uint64_t renew_failure = 0;
  std::uint64_t checks_sent = 0;
  std::uint64_t checks_updated = 0;
  std::uint64_t e_grants = 0;
  std::uint64_t l1_evictions = 0;
  std::uint64_t llc_evictions = 0;
};

/// Master copy of an address as observed right after an access at `step`.
struct MasterObs {
  Addr addr = 0;
  Timestamp wts;
  Timestamp rts;
  ValueToken value;
  std::uint64_t step = 0;
};

/// An S-state L1 copy used to serve a load at `step`.
struct SnapshotObs {
  Addr addr = 0;
  CoreId core = 0;
  Timestamp wts;
  Timestamp rts;
  ValueToken value;
  std::uint64_t step = 0;
};

/// Runtime invariant findings plus the observations the offline lemma scan
/// consumes. Only populated when auditing is on.
struct AuditLog {
  std::vector<std::string> violations;
  std::vector<MasterObs> masters;
  std::vector<SnapshotObs> snapshots;
};

}  // namespace tsim
