#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsim/cachemem.hpp"
#include "tsim/consistency.hpp"
#include "tsim/leasepred.hpp"
#include "tsim/livelock.hpp"
#include "tsim/network.hpp"
#include "tsim/protocol.hpp"

namespace tsim {

/// Classification of an L1 load before any message is sent.
enum class L1Probe : std::uint8_t { Hit, NeedsRenew, NeedsFetch };

struct LlcLoadReply {
  bool exclusive = false;
  Timestamp wts;
  Timestamp rts;
  ValueToken value;
  std::uint32_t lease = 0;
};

struct RenewReply {
  bool success = false;
  Timestamp wts;
  Timestamp rts;
  std::optional<ValueToken> value;  // only on failure
  std::uint32_t lease = 0;
};

struct StoreGrant {
  Timestamp floor;
  Timestamp wts;
  Timestamp rts;
  ValueToken value;
};

struct CheckReply {
  bool updated = false;
  Timestamp wts;
  Timestamp rts;
  std::optional<ValueToken> value;
  std::uint32_t lease = 0;
};

/// Timestamp coherence: private L1s plus a shared LLC, no invalidations.
/// Every request is processed as one atomic transaction; the returned
/// latency is what the requesting core stalls for.
class TardisProtocol {
 public:
  explicit TardisProtocol(const ProtocolParams& params);

  AccessResult load(CoreId core, Addr addr, CoreClock& clock, LivelockDetector* detector, std::uint64_t step);
  AccessResult store(CoreId core, Addr addr, const ValueToken& token, CoreClock& clock, Timestamp extra_floor,
                     std::uint64_t step);

  void preset(const LinePreset& preset);

  L1Probe l1_probe(CoreId core, Addr addr, const CoreClock& clock) const;

  // LLC-side handlers. Public so tests can drive them directly; `core` is
  // the requester and `latency` accumulates the transaction's cost.
  LlcLoadReply llc_load(CoreId core, Addr addr, Timestamp req_ts, std::uint32_t req_lease, std::uint64_t& latency);
  RenewReply llc_renew(CoreId core, Addr addr, Timestamp req_wts, Timestamp req_ts, std::uint32_t req_lease,
                       std::uint64_t& latency);
  StoreGrant llc_store(CoreId core, Addr addr, std::optional<Timestamp> copy_wts, std::uint64_t& latency);
  CheckReply llc_check(CoreId core, Addr addr, Timestamp req_wts, std::uint64_t& latency);

  const CacheLine* l1_line(CoreId core, Addr addr) const { return l1s_.at(core).find(addr); }
  const LlcLine* llc_line(Addr addr) const { return llc_.find(addr); }
  MemEntry memory(Addr addr) const { return memory_.read(addr); }

  const Network& network() const { return net_; }
  const ProtocolStats& stats() const { return stats_; }
  const AuditLog& audit() const { return audit_; }
  const ProtocolParams& params() const { return params_; }

  void append_key(std::string& out) const;

 private:
  LlcLine& fetch_llc(Addr addr, std::uint64_t& latency);
  void evict_llc(const LlcLine& victim);
  void recall(LlcLine& line, bool downgrade, std::uint64_t& latency);
  void install_l1(CoreId core, const CacheLine& line);
  void evict_l1(CoreId core, const CacheLine& victim);
  std::uint32_t grant_lease(LlcLine& line, LeaseRequest type, std::uint32_t req_lease);
  std::uint32_t send(const CoherenceMsg& msg, int from, int to) { return net_.send(msg, from, to); }
  int tile_of(CoreId core) const { return core; }
  int home(Addr addr) const { return net_.mesh().home_of(addr); }

  void begin(std::uint64_t step);
  void finish_audit();
  void audit_address(Addr addr);

  ProtocolParams params_;
  std::vector<SetAssocCache<CacheLine>> l1s_;
  SetAssocCache<LlcLine> llc_;
  MainMemory memory_;
  Network net_;
  ProtocolStats stats_;
  AuditLog audit_;

  // Bookkeeping for the runtime audit; not part of the protocol state.
  std::uint64_t step_ = 0;
  std::vector<Addr> touched_;
  std::map<Addr, std::pair<Timestamp, Timestamp>> last_master_;
  CoreId downgraded_owner_ = -1;
};

}  // namespace tsim
