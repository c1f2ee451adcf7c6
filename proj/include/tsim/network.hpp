#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "tsim/cachemem.hpp"
#include "tsim/chrono.hpp"

namespace tsim {

enum class MsgKind : std::uint8_t {
  LoadReq,
  StoreReq,
  RenewReq,
  CheckReq,
  WritebackReq,  // LLC asks an owner to downgrade or give up its line
  EvictWb,       // L1 voluntarily writes back an M/E line
  LoadResp,
  ExclResp,
  RenewResp,
  CheckResp,
  WbResp,
  Ack,
  InvReq,
  InvAck,
  EvictNotify,  // directory: shared line dropped by an L1
  DramReq,
  DramResp,
  DramWb,
  kCount
};

inline constexpr std::size_t kMsgKinds = static_cast<std::size_t>(MsgKind::kCount);

std::string_view to_string(MsgKind kind);

enum class TrafficClass : std::uint8_t { Common, Renew, Invalidation, Dram, kCount };

inline constexpr std::size_t kTrafficClasses = static_cast<std::size_t>(TrafficClass::kCount);

std::string_view to_string(TrafficClass cls);
TrafficClass class_of(MsgKind kind);

struct CoherenceMsg {
  MsgKind kind = MsgKind::LoadReq;
  Addr addr = 0;
  CoreId core = -1;  // requesting or target core
  Timestamp req_ts;
  Timestamp wts;
  Timestamp rts;
  std::optional<ValueToken> value;  // present iff this is a data message
  std::uint32_t lease = 0;
  bool success = false;  // renew succeeded / check found an update

  bool carries_data() const { return value.has_value(); }
};

/// Control messages are one flit; data messages add line_bytes / flit width.
std::uint32_t flit_cost(const CoherenceMsg& msg, std::uint32_t line_bytes, std::uint32_t flit_bits = 128);

struct TrafficTotals {
  std::uint64_t messages = 0;
  std::uint64_t flits = 0;
  std::uint64_t flit_hops = 0;

  bool operator==(const TrafficTotals&) const = default;
};

class TrafficLedger {
 public:
  void record(MsgKind kind, std::uint32_t flits, std::uint32_t hops);

  const TrafficTotals& by_class(TrafficClass cls) const { return classes_[static_cast<std::size_t>(cls)]; }
  std::uint64_t count(MsgKind kind) const { return kinds_[static_cast<std::size_t>(kind)]; }
  TrafficTotals total() const;

  bool operator==(const TrafficLedger&) const = default;

 private:
  std::array<TrafficTotals, kTrafficClasses> classes_{};
  std::array<std::uint64_t, kMsgKinds> kinds_{};
};

/// 2-D mesh with XY routing. Core i sits on tile i; an address is homed on
/// tile (addr mod tiles); the memory controller sits on tile 0.
class Mesh {
 public:
  Mesh() = default;
  Mesh(int tiles, std::uint32_t hop_latency);

  std::uint32_t hops(int from, int to) const;
  int home_of(Addr addr) const { return static_cast<int>(addr % static_cast<Addr>(tiles_)); }
  int memory_tile() const { return 0; }
  std::uint32_t latency(int from, int to) const { return hops(from, to) * hop_latency_; }
  std::uint32_t hop_latency() const { return hop_latency_; }

 private:
  int tiles_ = 1;
  int width_ = 1;
  std::uint32_t hop_latency_ = 2;
};

struct LoggedMsg {
  std::uint64_t step = 0;
  CoherenceMsg msg;
  std::uint32_t flits = 0;
};

/// Message accounting: every send lands in exactly one traffic class.
class Network {
 public:
  Network() = default;
  Network(int tiles, std::uint32_t hop_latency, std::uint32_t line_bytes);

  /// Accounts for the message and returns its delivery latency in cycles.
  std::uint32_t send(const CoherenceMsg& msg, int from, int to);

  const Mesh& mesh() const { return mesh_; }
  const TrafficLedger& ledger() const { return ledger_; }

  void set_logging(bool on) { logging_ = on; }
  void set_step(std::uint64_t step) { step_ = step; }
  const std::vector<LoggedMsg>& log() const { return log_; }

 private:
  Mesh mesh_;
  std::uint32_t line_bytes_ = 64;
  TrafficLedger ledger_;
  bool logging_ = false;
  std::uint64_t step_ = 0;
  std::vector<LoggedMsg> log_;
};

}  // namespace tsim
