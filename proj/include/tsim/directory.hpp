#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsim/cachemem.hpp"
#include "tsim/consistency.hpp"
#include "tsim/livelock.hpp"
#include "tsim/network.hpp"
#include "tsim/protocol.hpp"

namespace tsim {

enum class DirState : std::uint8_t { Uncached, Shared, Exclusive };

struct DirEntry {
  Addr addr = 0;
  DirState state = DirState::Uncached;
  std::uint64_t sharers = 0;  // bit per core; Shared only
  CoreId owner = -1;          // Exclusive only
  ValueToken value;
  bool dirty = false;

  int sharer_count() const;
  bool operator==(const DirEntry&) const = default;
};

/// Full-map MESI directory co-located with the LLC. The home blocks while
/// invalidations are outstanding, so every request is one atomic step.
class DirectoryProtocol {
 public:
  explicit DirectoryProtocol(const ProtocolParams& params);

  // The clock and detector are accepted for interface parity; physical
  // order alone carries consistency here, so every op is stamped ts 0.
  AccessResult load(CoreId core, Addr addr, CoreClock& clock, LivelockDetector* detector, std::uint64_t step);
  AccessResult store(CoreId core, Addr addr, const ValueToken& token, CoreClock& clock, Timestamp extra_floor,
                     std::uint64_t step);

  void preset(const LinePreset& preset);

  const CacheLine* l1_line(CoreId core, Addr addr) const { return l1s_.at(core).find(addr); }
  const DirEntry* dir_entry(Addr addr) const { return llc_.find(addr); }

  const Network& network() const { return net_; }
  const ProtocolStats& stats() const { return stats_; }
  const AuditLog& audit() const { return audit_; }
  const ProtocolParams& params() const { return params_; }

  void append_key(std::string& out) const;

 private:
  DirEntry& fetch(Addr addr, std::uint64_t& latency);
  void evict_dir(const DirEntry& victim);
  void invalidate_sharers(DirEntry& entry, CoreId except, std::uint64_t& latency);
  void pull_owner(DirEntry& entry, bool keep_shared, std::uint64_t& latency);
  void install_l1(CoreId core, const CacheLine& line);
  void evict_l1(CoreId core, const CacheLine& victim);
  int home(Addr addr) const { return net_.mesh().home_of(addr); }
  void audit_address(Addr addr);

  ProtocolParams params_;
  std::vector<SetAssocCache<CacheLine>> l1s_;
  SetAssocCache<DirEntry> llc_;
  MainMemory memory_;
  Network net_;
  ProtocolStats stats_;
  AuditLog audit_;
  std::uint64_t step_ = 0;
  std::vector<Addr> touched_;
};

}  // namespace tsim
