#include "tsim/tardis.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "tsim/errors.hpp"

namespace tsim {

namespace {

CoherenceMsg make_msg(MsgKind kind, Addr addr, CoreId core) {
  CoherenceMsg m;
  m.kind = kind;
  m.addr = addr;
  m.core = core;
  return m;
}

CoherenceMsg data_msg(MsgKind kind, Addr addr, CoreId core, Timestamp wts, Timestamp rts, const ValueToken& v) {
  CoherenceMsg m = make_msg(kind, addr, core);
  m.wts = wts;
  m.rts = rts;
  m.value = v;
  return m;
}

void append_token(std::string& out, const ValueToken& v) {
  out += std::to_string(v.writer) + '.' + std::to_string(v.seq) + '.' + std::to_string(v.data);
}

bool is_master_state(L1State s) { return s == L1State::M || s == L1State::E; }

}  // namespace

TardisProtocol::TardisProtocol(const ProtocolParams& params)
    : params_(params), net_(params.cores, params.hop_latency, params.geometry.line_bytes) {
  if (params.cores < 1 || params.cores > 64) throw ConfigError("cores must be in [1, 64]");
  if (params.static_lease == 0) throw ConfigError("static_lease must be positive");
  params.geometry.validate();
  l1s_.reserve(static_cast<std::size_t>(params.cores));
  for (int c = 0; c < params.cores; ++c)
    l1s_.emplace_back(params.geometry.l1_sets(), params.geometry.l1_ways);
  llc_ = SetAssocCache<LlcLine>(params.geometry.llc_sets(), params.geometry.llc_ways);
  net_.set_logging(params.log_messages);
}

L1Probe TardisProtocol::l1_probe(CoreId core, Addr addr, const CoreClock& clock) const {
  const CacheLine* line = l1s_.at(core).find(addr);
  if (!line) return L1Probe::NeedsFetch;
  if (is_master_state(line->state)) return L1Probe::Hit;
  return clock.read_ts() <= line->rts ? L1Probe::Hit : L1Probe::NeedsRenew;
}

std::uint32_t TardisProtocol::grant_lease(LlcLine& line, LeaseRequest type, std::uint32_t req_lease) {
  if (!params_.lease_predictor) return params_.static_lease;
  if (!is_encodable_lease(req_lease)) req_lease = kMinLease;
  return predict_lease(line.cur_lease, type, req_lease);
}

void TardisProtocol::begin(std::uint64_t step) {
  step_ = step;
  net_.set_step(step);
  touched_.clear();
  downgraded_owner_ = -1;
}

LlcLine& TardisProtocol::fetch_llc(Addr addr, std::uint64_t& latency) {
  latency += params_.llc_latency;
  if (LlcLine* line = llc_.find(addr)) {
    llc_.touch(addr);
    return *line;
  }
  if (auto victim = llc_.victim_for(addr)) evict_llc(*victim);

  const MemEntry m = memory_.read(addr);
  const int mc = net_.mesh().memory_tile();
  latency += send(make_msg(MsgKind::DramReq, addr, -1), home(addr), mc);
  latency += params_.dram_latency;
  latency += send(data_msg(MsgKind::DramResp, addr, -1, m.wts, m.rts, m.value), mc, home(addr));

  LlcLine line;
  line.addr = addr;
  line.wts = m.wts;
  line.rts = m.rts;
  line.value = m.value;
  line.e_bit = params_.mesi;
  line.cur_lease = m.cur_lease != 0 ? m.cur_lease : kMinLease;
  return llc_.insert(line);
}

void TardisProtocol::evict_llc(const LlcLine& victim) {
  ++stats_.llc_evictions;
  touched_.push_back(victim.addr);
  LlcLine* line = llc_.find(victim.addr);
  std::uint64_t ignored = 0;
  if (line->owned) recall(*line, false, ignored);

  memory_.write(line->addr, MemEntry{line->value, line->wts, line->rts, line->cur_lease});
  CoherenceMsg wb = make_msg(MsgKind::DramWb, line->addr, -1);
  wb.wts = line->wts;
  wb.rts = line->rts;
  if (line->dirty) wb.value = line->value;
  send(wb, home(line->addr), net_.mesh().memory_tile());
  llc_.erase(victim.addr);
}

void TardisProtocol::recall(LlcLine& line, bool downgrade, std::uint64_t& latency) {
  const CoreId owner = line.owner;
  CacheLine* l = l1s_.at(owner).find(line.addr);
  if (!l || !is_master_state(l->state)) {
    throw std::logic_error("LLC marks core " + std::to_string(owner) + " owner of line " +
                           std::to_string(line.addr) + " but its L1 has no M/E copy");
  }
  latency += send(make_msg(MsgKind::WritebackReq, line.addr, owner), home(line.addr), tile_of(owner));
  CoherenceMsg resp = make_msg(MsgKind::WbResp, line.addr, owner);
  resp.wts = l->wts;
  resp.rts = l->rts;
  if (l->dirty) resp.value = l->value;
  latency += send(resp, tile_of(owner), home(line.addr));

  line.wts = l->wts;
  line.rts = l->rts;
  line.value = l->value;
  line.dirty = line.dirty || l->dirty;
  line.owned = false;
  line.owner = -1;
  if (downgrade) {
    l->state = L1State::S;
    l->dirty = false;
    l->lease = params_.lease_predictor ? line.cur_lease : params_.static_lease;
    downgraded_owner_ = owner;
  } else {
    l1s_.at(owner).erase(line.addr);
  }
}

void TardisProtocol::install_l1(CoreId core, const CacheLine& line) {
  auto& l1 = l1s_.at(core);
  if (CacheLine* cur = l1.find(line.addr)) {
    *cur = line;
    l1.touch(line.addr);
    return;
  }
  if (auto victim = l1.victim_for(line.addr)) evict_l1(core, *victim);
  l1.insert(line);
}

void TardisProtocol::evict_l1(CoreId core, const CacheLine& victim) {
  ++stats_.l1_evictions;
  auto& l1 = l1s_.at(core);
  if (victim.state == L1State::S) {
    l1.erase(victim.addr);
    return;
  }
  touched_.push_back(victim.addr);
  LlcLine* line = llc_.find(victim.addr);
  if (!line || !line->owned || line->owner != core) {
    throw std::logic_error("L1 " + std::to_string(core) + " holds M/E line " + std::to_string(victim.addr) +
                           " that the LLC does not record as owned by it");
  }
  CoherenceMsg wb = make_msg(MsgKind::EvictWb, victim.addr, core);
  wb.wts = victim.wts;
  wb.rts = victim.rts;
  if (victim.dirty) wb.value = victim.value;
  send(wb, tile_of(core), home(victim.addr));

  line->wts = victim.wts;
  line->rts = victim.rts;
  line->value = victim.value;
  line->dirty = line->dirty || victim.dirty;
  line->owned = false;
  line->owner = -1;
  line->e_bit = params_.mesi;
  l1.erase(victim.addr);
}

LlcLoadReply TardisProtocol::llc_load(CoreId core, Addr addr, Timestamp req_ts, std::uint32_t req_lease,
                                      std::uint64_t& latency) {
  CoherenceMsg req = make_msg(MsgKind::LoadReq, addr, core);
  req.req_ts = req_ts;
  req.lease = req_lease;
  latency += send(req, tile_of(core), home(addr));
  LlcLine& line = fetch_llc(addr, latency);
  ++stats_.llc_accesses;

  bool recalled = false;
  if (line.owned) {
    if (line.owner == core) throw std::logic_error("load request from the line's own owner");
    recall(line, true, latency);
    recalled = true;
  }

  LlcLoadReply reply;
  if (params_.mesi && line.e_bit && !recalled) {
    ++stats_.e_grants;
    line.owned = true;
    line.owner = core;
    line.e_bit = false;
    reply.exclusive = true;
    reply.lease = params_.lease_predictor ? line.cur_lease : params_.static_lease;
  } else {
    reply.lease = grant_lease(line, LeaseRequest::Read, req_lease);
    line.rts = std::max(line.rts, req_ts + reply.lease);
    line.e_bit = false;
    if (recalled) {
      // The former owner keeps a shared copy with the extended lease too.
      if (CacheLine* prev = l1s_.at(downgraded_owner_).find(addr)) prev->rts = line.rts;
    }
  }
  reply.wts = line.wts;
  reply.rts = line.rts;
  reply.value = line.value;
  CoherenceMsg resp = data_msg(reply.exclusive ? MsgKind::ExclResp : MsgKind::LoadResp, addr, core, reply.wts,
                               reply.rts, reply.value);
  resp.lease = reply.lease;
  latency += send(resp, home(addr), tile_of(core));
  return reply;
}

RenewReply TardisProtocol::llc_renew(CoreId core, Addr addr, Timestamp req_wts, Timestamp req_ts,
                                     std::uint32_t req_lease, std::uint64_t& latency) {
  CoherenceMsg req = make_msg(MsgKind::RenewReq, addr, core);
  req.req_ts = req_ts;
  req.wts = req_wts;
  req.lease = req_lease;
  latency += send(req, tile_of(core), home(addr));
  LlcLine& line = fetch_llc(addr, latency);
  ++stats_.llc_accesses;
  ++stats_.renew_requests;

  if (line.owned) {
    if (line.owner == core) throw std::logic_error("renew request from the line's own owner");
    recall(line, true, latency);
  }

  RenewReply reply;
  reply.lease = grant_lease(line, LeaseRequest::Renew, req_lease);
  line.rts = std::max(line.rts, req_ts + reply.lease);
  line.e_bit = false;
  if (downgraded_owner_ >= 0) {
    if (CacheLine* prev = l1s_.at(downgraded_owner_).find(addr)) prev->rts = line.rts;
  }
  reply.success = line.wts == req_wts;
  reply.wts = line.wts;
  reply.rts = line.rts;
  if (!reply.success) reply.value = line.value;
  (reply.success ? stats_.renew_success : stats_.renew_failure)++;

  CoherenceMsg resp = make_msg(MsgKind::RenewResp, addr, core);
  resp.wts = reply.wts;
  resp.rts = reply.rts;
  resp.value = reply.value;
  resp.lease = reply.lease;
  resp.success = reply.success;
  latency += send(resp, home(addr), tile_of(core));
  return reply;
}

StoreGrant TardisProtocol::llc_store(CoreId core, Addr addr, std::optional<Timestamp> copy_wts,
                                     std::uint64_t& latency) {
  latency += send(make_msg(MsgKind::StoreReq, addr, core), tile_of(core), home(addr));
  LlcLine& line = fetch_llc(addr, latency);
  ++stats_.llc_accesses;

  if (line.owned) {
    if (line.owner == core) throw std::logic_error("store request from the line's own owner");
    recall(line, false, latency);
  }
  if (params_.lease_predictor) predict_lease(line.cur_lease, LeaseRequest::Write, kMinLease);

  StoreGrant grant;
  grant.floor = line.rts.next();
  grant.wts = line.wts;
  grant.rts = line.rts;
  grant.value = line.value;
  line.owned = true;
  line.owner = core;
  line.e_bit = false;

  CoherenceMsg resp = make_msg(MsgKind::ExclResp, addr, core);
  resp.wts = line.wts;
  resp.rts = line.rts;
  // The data travels only if the requester's copy is missing or stale.
  if (!copy_wts || *copy_wts != line.wts) resp.value = line.value;
  latency += send(resp, home(addr), tile_of(core));
  return grant;
}

CheckReply TardisProtocol::llc_check(CoreId core, Addr addr, Timestamp req_wts, std::uint64_t& latency) {
  CoherenceMsg req = make_msg(MsgKind::CheckReq, addr, core);
  req.wts = req_wts;
  latency += send(req, tile_of(core), home(addr));
  LlcLine& line = fetch_llc(addr, latency);
  ++stats_.llc_accesses;
  ++stats_.checks_sent;

  if (line.owned) {
    if (line.owner == core) throw std::logic_error("check request from the line's own owner");
    recall(line, true, latency);
  }

  CheckReply reply;
  reply.updated = line.wts != req_wts;
  reply.wts = line.wts;
  reply.rts = line.rts;
  reply.lease = params_.lease_predictor ? line.cur_lease : params_.static_lease;
  if (reply.updated) {
    ++stats_.checks_updated;
    reply.value = line.value;
    line.e_bit = false;
  }
  CoherenceMsg resp = make_msg(MsgKind::CheckResp, addr, core);
  resp.wts = reply.wts;
  resp.rts = reply.rts;
  resp.value = reply.value;
  resp.success = reply.updated;
  latency += send(resp, home(addr), tile_of(core));
  return reply;
}

AccessResult TardisProtocol::load(CoreId core, Addr addr, CoreClock& clock, LivelockDetector* detector,
                                  std::uint64_t step) {
  begin(step);
  touched_.push_back(addr);
  auto& l1 = l1s_.at(core);
  const Timestamp read_ts = clock.read_ts();
  AccessResult out;
  out.latency = params_.l1_latency;
  bool snapshot = false;

  CacheLine* line = l1.find(addr);
  if (line && is_master_state(line->state)) {
    // A private copy can extend its own lease without asking anyone.
    if (read_ts > line->rts) line->rts = read_ts;
    const bool dirty_by_self = line->dirty && clock.model != MemoryModel::SC;
    out.ts = commit_load(clock, line->wts, line->rts, dirty_by_self);
    out.value = line->value;
    l1.touch(addr);
  } else if (line && read_ts <= line->rts) {
    if (detector && detector->on_shared_load(addr)) {
      std::uint64_t lat = 0;
      const CheckReply reply = llc_check(core, addr, line->wts, lat);
      detector->on_check_response(reply.updated);
      out.path = reply.updated ? AccessPath::CheckUpdated : AccessPath::CheckSame;
      if (reply.updated) {
        out.latency += lat;
        install_l1(core, CacheLine{addr, L1State::S, reply.wts, reply.rts, *reply.value, false, reply.lease});
      }
      line = l1.find(addr);
    }
    l1.touch(addr);
    out.ts = commit_load(clock, line->wts, line->rts, false);
    out.value = line->value;
    snapshot = true;
  } else if (line) {
    std::uint64_t lat = 0;
    const RenewReply reply = llc_renew(core, addr, line->wts, read_ts, line->lease, lat);
    line = l1.find(addr);
    line->rts = reply.rts;
    line->lease = reply.lease;
    out.path = reply.success ? AccessPath::RenewOk : AccessPath::RenewFail;
    if (reply.success) {
      // Speculative use of the expired copy hides a successful renewal.
    } else {
      line->wts = reply.wts;
      line->value = *reply.value;
      out.latency += lat;
    }
    l1.touch(addr);
    out.ts = commit_load(clock, line->wts, line->rts, false);
    out.value = line->value;
    snapshot = true;
  } else {
    std::uint64_t lat = 0;
    const std::uint32_t req_lease = params_.lease_predictor ? kMinLease : params_.static_lease;
    const LlcLoadReply reply = llc_load(core, addr, read_ts, req_lease, lat);
    out.latency += lat;
    out.path = AccessPath::Miss;
    install_l1(core, CacheLine{addr, reply.exclusive ? L1State::E : L1State::S, reply.wts, reply.rts, reply.value,
                               false, reply.lease});
    line = l1.find(addr);
    if (reply.exclusive && read_ts > line->rts) line->rts = read_ts;
    out.ts = commit_load(clock, line->wts, line->rts, false);
    out.value = line->value;
    snapshot = !reply.exclusive;
  }

  if (params_.audit && snapshot) audit_.snapshots.push_back(SnapshotObs{addr, core, line->wts, line->rts, line->value, step});
  finish_audit();
  return out;
}

AccessResult TardisProtocol::store(CoreId core, Addr addr, const ValueToken& token, CoreClock& clock,
                                   Timestamp extra_floor, std::uint64_t step) {
  begin(step);
  touched_.push_back(addr);
  auto& l1 = l1s_.at(core);
  AccessResult out;
  out.latency = params_.l1_latency;
  out.value = token;

  CacheLine* line = l1.find(addr);
  if (line && is_master_state(line->state)) {
    // M: private write, no bump past the line's own lease. E: the clean
    // version may still be cached elsewhere as a snapshot, so jump past it.
    const Timestamp floor = line->state == L1State::M ? line->rts : line->rts.next();
    out.ts = commit_store(clock, std::max(floor, extra_floor));
    line->state = L1State::M;
    line->dirty = true;
    line->wts = out.ts;
    line->rts = out.ts;
    line->value = token;
    l1.touch(addr);
  } else {
    std::uint64_t lat = 0;
    std::optional<Timestamp> copy_wts;
    if (line) copy_wts = line->wts;
    const StoreGrant grant = llc_store(core, addr, copy_wts, lat);
    out.latency += lat;
    out.path = line ? AccessPath::Upgrade : AccessPath::Miss;
    out.ts = commit_store(clock, std::max(grant.floor, extra_floor));
    const std::uint32_t lease = params_.lease_predictor ? kMinLease : params_.static_lease;
    install_l1(core, CacheLine{addr, L1State::M, out.ts, out.ts, token, true, lease});
  }
  finish_audit();
  return out;
}

void TardisProtocol::preset(const LinePreset& p) {
  begin(0);
  LlcLine* line = llc_.find(p.addr);
  if (!line) {
    if (auto victim = llc_.victim_for(p.addr)) evict_llc(*victim);
    line = &llc_.insert(LlcLine{p.addr, false, -1, p.wts, p.rts, ValueToken::initial(p.addr), false, kMinLease, false});
  } else {
    line->wts = p.wts;
    line->rts = p.rts;
    line->e_bit = false;
  }
  const std::uint32_t lease = params_.lease_predictor ? kMinLease : params_.static_lease;
  for (CoreId c : p.sharers) {
    if (c < 0 || c >= params_.cores) throw ConfigError("preset sharer core out of range");
    install_l1(c, CacheLine{p.addr, L1State::S, p.wts, p.rts, ValueToken::initial(p.addr), false, lease});
  }
  last_master_[p.addr] = {p.wts, p.rts};
}

void TardisProtocol::finish_audit() {
  if (!params_.audit) return;
  std::sort(touched_.begin(), touched_.end());
  touched_.erase(std::unique(touched_.begin(), touched_.end()), touched_.end());
  for (Addr a : touched_) audit_address(a);
}

void TardisProtocol::audit_address(Addr addr) {
  auto fail = [&](const std::string& what) {
    std::ostringstream os;
    os << "step " << step_ << " addr " << addr << ": " << what;
    audit_.violations.push_back(os.str());
  };

  std::vector<CoreId> holders;
  for (CoreId c = 0; c < params_.cores; ++c) {
    const CacheLine* l = l1s_[c].find(addr);
    if (!l) continue;
    if (l->wts > l->rts) fail("L1 " + std::to_string(c) + " line has wts > rts");
    if (l->dirty && l->state != L1State::M) fail("dirty line not in M");
    if (is_master_state(l->state)) holders.push_back(c);
  }

  const LlcLine* llc = llc_.find(addr);
  Timestamp wts, rts;
  ValueToken value;
  if (llc && llc->owned) {
    if (holders.size() != 1 || holders.front() != llc->owner) {
      fail("LLC owner " + std::to_string(llc->owner) + " but " + std::to_string(holders.size()) + " L1 master(s)");
      return;
    }
    const CacheLine* l = l1s_[llc->owner].find(addr);
    wts = l->wts;
    rts = l->rts;
    value = l->value;
  } else {
    if (!holders.empty()) {
      fail("L1 master copy without LLC ownership");
      return;
    }
    if (llc) {
      wts = llc->wts;
      rts = llc->rts;
      value = llc->value;
    } else {
      const MemEntry m = memory_.read(addr);
      wts = m.wts;
      rts = m.rts;
      value = m.value;
    }
  }
  if (wts > rts) fail("master wts > rts");

  auto [it, fresh] = last_master_.try_emplace(addr, wts, rts);
  if (!fresh) {
    if (wts < it->second.first || rts < it->second.second) {
      std::ostringstream os;
      os << "master went from (" << it->second.first << ", " << it->second.second << ") to (" << wts << ", " << rts
         << ")";
      fail(os.str());
    }
    it->second = {wts, rts};
  }
  audit_.masters.push_back(MasterObs{addr, wts, rts, value, step_});
}

void TardisProtocol::append_key(std::string& out) const {
  for (std::size_t c = 0; c < l1s_.size(); ++c) {
    out += "L1" + std::to_string(c) + '[';
    l1s_[c].for_each_lru_ordered([&](const CacheLine& l) {
      out += std::to_string(l.addr) + to_char(l.state) + std::to_string(l.wts.value) + '-' +
             std::to_string(l.rts.value) + (l.dirty ? "d" : "") + 'l' + std::to_string(l.lease) + ':';
      append_token(out, l.value);
      out += ',';
    });
    out += ']';
  }
  out += "LLC[";
  llc_.for_each_lru_ordered([&](const LlcLine& l) {
    out += std::to_string(l.addr) + (l.owned ? 'O' + std::to_string(l.owner) : std::string("S")) +
           std::to_string(l.wts.value) + '-' + std::to_string(l.rts.value) + (l.e_bit ? "e" : "") +
           (l.dirty ? "d" : "") + 'l' + std::to_string(l.cur_lease) + ':';
    append_token(out, l.value);
    out += ',';
  });
  out += "]MEM[";
  memory_.append_key(out);
  out += ']';
}

}  // namespace tsim
