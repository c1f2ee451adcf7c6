#include "tsim/directory.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <stdexcept>

#include "tsim/errors.hpp"

namespace tsim {

namespace {

CoherenceMsg make_msg(MsgKind kind, Addr addr, CoreId core, std::optional<ValueToken> value = {}) {
  CoherenceMsg m;
  m.kind = kind;
  m.addr = addr;
  m.core = core;
  m.value = value;
  return m;
}

std::uint64_t bit(CoreId c) { return std::uint64_t{1} << c; }

}  // namespace

int DirEntry::sharer_count() const { return std::popcount(sharers); }

DirectoryProtocol::DirectoryProtocol(const ProtocolParams& params)
    : params_(params), net_(params.cores, params.hop_latency, params.geometry.line_bytes) {
  if (params.cores < 1 || params.cores > 64) throw ConfigError("cores must be in [1, 64]");
  params.geometry.validate();
  for (int c = 0; c < params.cores; ++c) l1s_.emplace_back(params.geometry.l1_sets(), params.geometry.l1_ways);
  llc_ = SetAssocCache<DirEntry>(params.geometry.llc_sets(), params.geometry.llc_ways);
  net_.set_logging(params.log_messages);
}

DirEntry& DirectoryProtocol::fetch(Addr addr, std::uint64_t& latency) {
  latency += params_.llc_latency;
  if (DirEntry* e = llc_.find(addr)) {
    llc_.touch(addr);
    return *e;
  }
  if (auto victim = llc_.victim_for(addr)) evict_dir(*victim);
  const MemEntry m = memory_.read(addr);
  const int mc = net_.mesh().memory_tile();
  latency += net_.send(make_msg(MsgKind::DramReq, addr, -1), home(addr), mc);
  latency += params_.dram_latency;
  latency += net_.send(make_msg(MsgKind::DramResp, addr, -1, m.value), mc, home(addr));
  DirEntry e;
  e.addr = addr;
  e.value = m.value;
  return llc_.insert(e);
}

void DirectoryProtocol::invalidate_sharers(DirEntry& entry, CoreId except, std::uint64_t& latency) {
  std::uint64_t worst = 0;
  for (CoreId c = 0; c < params_.cores; ++c) {
    if (c == except || !(entry.sharers & bit(c))) continue;
    std::uint64_t rt = net_.send(make_msg(MsgKind::InvReq, entry.addr, c), home(entry.addr), c);
    rt += net_.send(make_msg(MsgKind::InvAck, entry.addr, c), c, home(entry.addr));
    worst = std::max(worst, rt);
    l1s_[c].erase(entry.addr);
    entry.sharers &= ~bit(c);
  }
  latency += worst;
}

void DirectoryProtocol::pull_owner(DirEntry& entry, bool keep_shared, std::uint64_t& latency) {
  const CoreId owner = entry.owner;
  CacheLine* l = l1s_.at(owner).find(entry.addr);
  if (!l || (l->state != L1State::M && l->state != L1State::E))
    throw std::logic_error("directory owner " + std::to_string(owner) + " lacks an M/E copy");
  latency += net_.send(make_msg(MsgKind::WritebackReq, entry.addr, owner), home(entry.addr), owner);
  std::optional<ValueToken> data;
  if (l->dirty) data = l->value;
  latency += net_.send(make_msg(MsgKind::WbResp, entry.addr, owner, data), owner, home(entry.addr));
  entry.value = l->value;
  entry.dirty = entry.dirty || l->dirty;
  entry.owner = -1;
  if (keep_shared) {
    l->state = L1State::S;
    l->dirty = false;
    entry.state = DirState::Shared;
    entry.sharers = bit(owner);
  } else {
    l1s_[owner].erase(entry.addr);
    entry.state = DirState::Uncached;
    entry.sharers = 0;
  }
}

void DirectoryProtocol::evict_dir(const DirEntry& victim) {
  ++stats_.llc_evictions;
  touched_.push_back(victim.addr);
  DirEntry* e = llc_.find(victim.addr);
  std::uint64_t ignored = 0;
  if (e->state == DirState::Exclusive) pull_owner(*e, false, ignored);
  if (e->state == DirState::Shared) invalidate_sharers(*e, -1, ignored);
  memory_.write(e->addr, MemEntry{e->value, Timestamp{}, Timestamp{}, 0});
  std::optional<ValueToken> data;
  if (e->dirty) data = e->value;
  net_.send(make_msg(MsgKind::DramWb, e->addr, -1, data), home(e->addr), net_.mesh().memory_tile());
  llc_.erase(victim.addr);
}

void DirectoryProtocol::install_l1(CoreId core, const CacheLine& line) {
  auto& l1 = l1s_.at(core);
  if (CacheLine* cur = l1.find(line.addr)) {
    *cur = line;
    l1.touch(line.addr);
    return;
  }
  if (auto victim = l1.victim_for(line.addr)) evict_l1(core, *victim);
  l1.insert(line);
}

void DirectoryProtocol::evict_l1(CoreId core, const CacheLine& victim) {
  ++stats_.l1_evictions;
  touched_.push_back(victim.addr);
  DirEntry* e = llc_.find(victim.addr);
  if (!e) throw std::logic_error("L1 line without a directory entry");
  if (victim.state == L1State::S) {
    net_.send(make_msg(MsgKind::EvictNotify, victim.addr, core), core, home(victim.addr));
    e->sharers &= ~bit(core);
    if (e->sharers == 0) e->state = DirState::Uncached;
  } else {
    std::optional<ValueToken> data;
    if (victim.dirty) data = victim.value;
    net_.send(make_msg(MsgKind::EvictWb, victim.addr, core, data), core, home(victim.addr));
    e->value = victim.value;
    e->dirty = e->dirty || victim.dirty;
    e->state = DirState::Uncached;
    e->owner = -1;
  }
  l1s_[core].erase(victim.addr);
}

AccessResult DirectoryProtocol::load(CoreId core, Addr addr, CoreClock& /*clock*/, LivelockDetector* /*detector*/,
                                     std::uint64_t step) {
  step_ = step;
  net_.set_step(step);
  touched_.assign(1, addr);
  AccessResult out;
  out.latency = params_.l1_latency;
  auto& l1 = l1s_.at(core);

  if (CacheLine* line = l1.find(addr)) {
    l1.touch(addr);
    out.value = line->value;
  } else {
    std::uint64_t lat = net_.send(make_msg(MsgKind::LoadReq, addr, core), core, home(addr));
    DirEntry& e = fetch(addr, lat);
    ++stats_.llc_accesses;
    if (e.state == DirState::Exclusive) pull_owner(e, true, lat);

    L1State grant = L1State::S;
    if (e.state == DirState::Uncached && params_.mesi) {
      grant = L1State::E;
      e.state = DirState::Exclusive;
      e.owner = core;
      ++stats_.e_grants;
    } else {
      e.state = DirState::Shared;
      e.sharers |= bit(core);
    }
    const ValueToken v = e.value;
    lat += net_.send(make_msg(grant == L1State::E ? MsgKind::ExclResp : MsgKind::LoadResp, addr, core, v), home(addr),
                     core);
    install_l1(core, CacheLine{addr, grant, Timestamp{}, Timestamp{}, v, false, 0});
    out.value = v;
    out.path = AccessPath::Miss;
    out.latency += lat;
  }
  if (params_.audit) {
    std::sort(touched_.begin(), touched_.end());
    touched_.erase(std::unique(touched_.begin(), touched_.end()), touched_.end());
    for (Addr a : touched_) audit_address(a);
  }
  return out;
}

AccessResult DirectoryProtocol::store(CoreId core, Addr addr, const ValueToken& token, CoreClock& /*clock*/,
                                      Timestamp /*extra_floor*/, std::uint64_t step) {
  step_ = step;
  net_.set_step(step);
  touched_.assign(1, addr);
  AccessResult out;
  out.latency = params_.l1_latency;
  out.value = token;
  auto& l1 = l1s_.at(core);

  CacheLine* line = l1.find(addr);
  if (line && (line->state == L1State::M || line->state == L1State::E)) {
    line->state = L1State::M;
    line->dirty = true;
    line->value = token;
    l1.touch(addr);
  } else {
    const bool had_copy = line != nullptr;
    std::uint64_t lat = net_.send(make_msg(MsgKind::StoreReq, addr, core), core, home(addr));
    DirEntry& e = fetch(addr, lat);
    ++stats_.llc_accesses;
    if (e.state == DirState::Exclusive) pull_owner(e, false, lat);
    if (e.state == DirState::Shared) invalidate_sharers(e, core, lat);
    e.state = DirState::Exclusive;
    e.sharers = 0;
    e.owner = core;
    std::optional<ValueToken> data;
    if (!had_copy) data = e.value;
    lat += net_.send(make_msg(MsgKind::ExclResp, addr, core, data), home(addr), core);
    install_l1(core, CacheLine{addr, L1State::M, Timestamp{}, Timestamp{}, token, true, 0});
    out.latency += lat;
    out.path = had_copy ? AccessPath::Upgrade : AccessPath::Miss;
  }
  if (params_.audit) {
    std::sort(touched_.begin(), touched_.end());
    touched_.erase(std::unique(touched_.begin(), touched_.end()), touched_.end());
    for (Addr a : touched_) audit_address(a);
  }
  return out;
}

void DirectoryProtocol::preset(const LinePreset& p) {
  DirEntry* e = llc_.find(p.addr);
  if (!e) {
    if (auto victim = llc_.victim_for(p.addr)) evict_dir(*victim);
    e = &llc_.insert(DirEntry{p.addr, DirState::Uncached, 0, -1, ValueToken::initial(p.addr), false});
  }
  for (CoreId c : p.sharers) {
    if (c < 0 || c >= params_.cores) throw ConfigError("preset sharer core out of range");
    install_l1(c, CacheLine{p.addr, L1State::S, Timestamp{}, Timestamp{}, e->value, false, 0});
    e = llc_.find(p.addr);
    e->state = DirState::Shared;
    e->sharers |= bit(c);
  }
}

void DirectoryProtocol::audit_address(Addr addr) {
  int writers = 0;
  int readers = 0;
  std::uint64_t holders = 0;
  CoreId writer = -1;
  for (CoreId c = 0; c < params_.cores; ++c) {
    const CacheLine* l = l1s_[c].find(addr);
    if (!l) continue;
    holders |= bit(c);
    if (l->state == L1State::M || l->state == L1State::E) {
      ++writers;
      writer = c;
    } else {
      ++readers;
    }
  }
  std::ostringstream os;
  if (writers > 1 || (writers == 1 && readers > 0)) os << "SWMR broken: " << writers << " writers, " << readers << " readers";
  const DirEntry* e = llc_.find(addr);
  if (holders != 0 && !e) os << "cached line missing from directory";
  if (e) {
    if (e->state == DirState::Exclusive && (writers != 1 || writer != e->owner)) os << "directory owner mismatch";
    if (e->state == DirState::Shared && (writers != 0 || holders != e->sharers || e->sharers == 0))
      os << "sharer set mismatch";
    if (e->state == DirState::Uncached && holders != 0) os << "uncached line still held";
  }
  if (!os.str().empty()) audit_.violations.push_back("step " + std::to_string(step_) + " addr " + std::to_string(addr) + ": " + os.str());
}

void DirectoryProtocol::append_key(std::string& out) const {
  for (std::size_t c = 0; c < l1s_.size(); ++c) {
    out += "L1" + std::to_string(c) + '[';
    l1s_[c].for_each_lru_ordered([&](const CacheLine& l) {
      out += std::to_string(l.addr) + to_char(l.state) + std::to_string(l.value.writer) + '.' +
             std::to_string(l.value.seq) + '.' + std::to_string(l.value.data) + ',';
    });
    out += ']';
  }
  out += "DIR[";
  llc_.for_each_lru_ordered([&](const DirEntry& e) {
    out += std::to_string(e.addr) + 's' + std::to_string(static_cast<int>(e.state)) + 'm' +
           std::to_string(e.sharers) + 'o' + std::to_string(e.owner) + ':' + std::to_string(e.value.writer) + '.' +
           std::to_string(e.value.seq) + '.' + std::to_string(e.value.data) + (e.dirty ? "d," : ",");
  });
  out += "]MEM[";
  memory_.append_key(out);
  out += ']';
}

}  // namespace tsim
