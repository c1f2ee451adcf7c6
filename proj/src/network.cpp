#include "tsim/network.hpp"

#include <cmath>
#include <cstdlib>

namespace tsim {

std::string_view to_string(MsgKind kind) {
  switch (kind) {
    case MsgKind::LoadReq: return "load_req";
    case MsgKind::StoreReq: return "store_req";
    case MsgKind::RenewReq: return "renew_req";
    case MsgKind::CheckReq: return "check_req";
    case MsgKind::WritebackReq: return "writeback_req";
    case MsgKind::EvictWb: return "evict_wb";
    case MsgKind::LoadResp: return "load_resp";
    case MsgKind::ExclResp: return "excl_resp";
    case MsgKind::RenewResp: return "renew_resp";
    case MsgKind::CheckResp: return "check_resp";
    case MsgKind::WbResp: return "wb_resp";
    case MsgKind::Ack: return "ack";
    case MsgKind::InvReq: return "inv_req";
    case MsgKind::InvAck: return "inv_ack";
    case MsgKind::EvictNotify: return "evict_notify";
    case MsgKind::DramReq: return "dram_req";
    case MsgKind::DramResp: return "dram_resp";
    case MsgKind::DramWb: return "dram_wb";
    case MsgKind::kCount: break;
  }
  return "?";
}

std::string_view to_string(TrafficClass cls) {
  switch (cls) {
    case TrafficClass::Common: return "common";
    case TrafficClass::Renew: return "renew";
    case TrafficClass::Invalidation: return "invalidation";
    case TrafficClass::Dram: return "dram";
    case TrafficClass::kCount: break;
  }
  return "?";
}

TrafficClass class_of(MsgKind kind) {
  switch (kind) {
    case MsgKind::RenewReq:
    case MsgKind::CheckReq:
    case MsgKind::RenewResp:
    case MsgKind::CheckResp:
      return TrafficClass::Renew;
    case MsgKind::InvReq:
    case MsgKind::InvAck:
    case MsgKind::EvictNotify:
      return TrafficClass::Invalidation;
    case MsgKind::DramReq:
    case MsgKind::DramResp:
    case MsgKind::DramWb:
      return TrafficClass::Dram;
    default:
      return TrafficClass::Common;
  }
}

std::uint32_t flit_cost(const CoherenceMsg& msg, std::uint32_t line_bytes, std::uint32_t flit_bits) {
  const std::uint32_t flit_bytes = flit_bits / 8;
  if (!msg.carries_data()) return 1;
  return 1 + (line_bytes + flit_bytes - 1) / flit_bytes;
}

void TrafficLedger::record(MsgKind kind, std::uint32_t flits, std::uint32_t hops) {
  auto& c = classes_[static_cast<std::size_t>(class_of(kind))];
  ++c.messages;
  c.flits += flits;
  c.flit_hops += static_cast<std::uint64_t>(flits) * hops;
  ++kinds_[static_cast<std::size_t>(kind)];
}

TrafficTotals TrafficLedger::total() const {
  TrafficTotals t;
  for (const auto& c : classes_) {
    t.messages += c.messages;
    t.flits += c.flits;
    t.flit_hops += c.flit_hops;
  }
  return t;
}

Mesh::Mesh(int tiles, std::uint32_t hop_latency) : tiles_(tiles < 1 ? 1 : tiles), hop_latency_(hop_latency) {
  width_ = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(tiles_))));
  if (width_ < 1) width_ = 1;
}

std::uint32_t Mesh::hops(int from, int to) const {
  const int dx = std::abs(from % width_ - to % width_);
  const int dy = std::abs(from / width_ - to / width_);
  return static_cast<std::uint32_t>(dx + dy);
}

Network::Network(int tiles, std::uint32_t hop_latency, std::uint32_t line_bytes)
    : mesh_(tiles, hop_latency), line_bytes_(line_bytes) {}

std::uint32_t Network::send(const CoherenceMsg& msg, int from, int to) {
  const std::uint32_t flits = flit_cost(msg, line_bytes_);
  const std::uint32_t hops = mesh_.hops(from, to);
  ledger_.record(msg.kind, flits, hops);
  if (logging_) log_.push_back(LoggedMsg{step_, msg, flits});
  // Head latency plus serialization of the remaining flits.
  return hops * mesh_.hop_latency() + (flits - 1);
}

}  // namespace tsim
