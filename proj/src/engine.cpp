#include "tsim/engine.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <sstream>
#include <unordered_set>
#include <variant>

#include <spdlog/spdlog.h>

#include "tsim/checker.hpp"
#include "tsim/directory.hpp"
#include "tsim/errors.hpp"
#include "tsim/tardis.hpp"

namespace tsim {

std::string_view to_string(ProtocolKind kind) { return kind == ProtocolKind::Tardis ? "tardis" : "directory"; }

ProtocolKind parse_protocol(std::string_view text) {
  if (text == "tardis") return ProtocolKind::Tardis;
  if (text == "directory") return ProtocolKind::Directory;
  throw ConfigError("unknown protocol '" + std::string(text) + "' (expected tardis|directory)");
}

std::string_view to_string(OpClass cls) {
  switch (cls) {
    case OpClass::Load:
      return "Ld";
    case OpClass::Store:
      return "St";
    case OpClass::Fence:
      return "Fence";
    case OpClass::Acquire:
      return "Acq";
    case OpClass::Release:
      return "Rel";
  }
  return "?";
}

std::string_view to_string(AccessPath path) {
  switch (path) {
    case AccessPath::None:
      return "none";
    case AccessPath::Hit:
      return "hit";
    case AccessPath::Forward:
      return "forward";
    case AccessPath::Miss:
      return "miss";
    case AccessPath::RenewOk:
      return "renew_ok";
    case AccessPath::RenewFail:
      return "renew_fail";
    case AccessPath::CheckSame:
      return "check_same";
    case AccessPath::CheckUpdated:
      return "check_updated";
    case AccessPath::Upgrade:
      return "upgrade";
  }
  return "?";
}

void EngineConfig::validate() const {
  proto.geometry.validate();
  if (proto.static_lease == 0) throw ConfigError("static_lease must be positive");
  if (sb_capacity == 0) throw ConfigError("sb_capacity must be positive");
  if (skip_prob < 0.0 || skip_prob >= 1.0) throw ConfigError("skip_prob must lie in [0, 1)");
  if (max_cycles == 0) throw ConfigError("max_cycles must be positive");
  if (livelock.ahb_entries == 0 || livelock.min_count == 0 || livelock.max_count < livelock.min_count ||
      livelock.check_thresh == 0)
    throw ConfigError("bad livelock detector parameters");
}

namespace {

struct SbEntry {
  Addr addr = 0;
  ValueToken token;
  std::uint64_t seq = 0;
  std::size_t pc = 0;
  Timestamp floor;
  std::int64_t dep = -1;
};

struct CoreState {
  std::size_t pc = 0;
  std::array<std::int64_t, kNumRegs> regs{};
  std::array<std::int64_t, kNumRegs> reg_load{};
  std::array<Timestamp, kNumRegs> reg_ts{};
  std::uint64_t next_seq = 0;
  std::uint64_t stores = 0;
  std::uint64_t accesses = 0;
  std::uint64_t self_increments = 0;
  CoreClock clock;
  std::optional<LivelockDetector> detector;
  std::vector<SbEntry> sb;
  std::uint64_t busy_until = 0;
  std::uint64_t sb_busy_until = 0;
  std::uint64_t finish = 0;
  bool finished_recorded = false;

  CoreState() { reg_load.fill(-1); }
};

using Protocol = std::variant<TardisProtocol, DirectoryProtocol>;

Protocol make_protocol(const EngineConfig& cfg, int cores) {
  ProtocolParams p = cfg.proto;
  p.cores = cores;
  if (cfg.protocol == ProtocolKind::Tardis) return Protocol{std::in_place_type<TardisProtocol>, p};
  return Protocol{std::in_place_type<DirectoryProtocol>, p};
}

class Machine {
 public:
  Machine(const EngineConfig& cfg, const Program& prog)
      : cfg_(&cfg), prog_(&prog), proto_(make_protocol(cfg, prog.num_cores())), cores_(prog.num_cores()) {
    for (auto& c : cores_) {
      c.clock = CoreClock(cfg.model);
      if (cfg.livelock_detector && cfg.protocol == ProtocolKind::Tardis) c.detector.emplace(cfg.livelock);
    }
    for (const auto& il : prog.init) {
      std::visit([&](auto& p) { p.preset(LinePreset{il.addr, il.wts, il.rts, il.cores}); }, proto_);
    }
    for (CoreId c = 0; c < num_cores(); ++c) settle(c);
  }

  int num_cores() const { return static_cast<int>(cores_.size()); }
  const CoreState& core(CoreId c) const { return cores_[c]; }
  CoreState& core(CoreId c) { return cores_[c]; }

  bool program_done(CoreId c) const { return cores_[c].pc >= prog_->cores[c].size(); }

  bool all_done() const {
    for (CoreId c = 0; c < num_cores(); ++c)
      if (!program_done(c) || !cores_[c].sb.empty()) return false;
    return true;
  }

  void set_sync_stores(bool on) { sync_stores_ = on; }

  bool buffering() const {
    return cfg_->store_buffer && cfg_->model != MemoryModel::SC && !sync_stores_;
  }

  bool needs_drain(OpKind kind) const {
    switch (cfg_->model) {
      case MemoryModel::SC:
        return false;
      case MemoryModel::TSO:
      case MemoryModel::PSO:
        return true;
      case MemoryModel::RC:
        return kind != OpKind::Acquire;
    }
    return true;
  }

  bool can_exec(CoreId c) const {
    if (program_done(c)) return false;
    const CoreState& cs = cores_[c];
    const MemOp& op = prog_->cores[c][cs.pc];
    switch (op.kind) {
      case OpKind::Store:
        return !buffering() || cs.sb.size() < cfg_->sb_capacity;
      case OpKind::Fence:
      case OpKind::Acquire:
      case OpKind::Release:
        return !needs_drain(op.kind) || cs.sb.empty();
      default:
        return true;
    }
  }

  /// Indices of store-buffer entries that may drain next.
  std::vector<std::size_t> drainable(CoreId c) const {
    const auto& sb = cores_[c].sb;
    std::vector<std::size_t> out;
    if (sb.empty()) return out;
    if (cfg_->model == MemoryModel::TSO || cfg_->model == MemoryModel::SC) {
      out.push_back(0);
      return out;
    }
    for (std::size_t i = 0; i < sb.size(); ++i) {
      bool older_same = false;
      for (std::size_t j = 0; j < i; ++j) older_same = older_same || sb[j].addr == sb[i].addr;
      if (!older_same) out.push_back(i);
    }
    return out;
  }

  std::uint64_t exec(CoreId c) {
    CoreState& cs = cores_[c];
    const MemOp& op = prog_->cores[c][cs.pc];
    std::uint64_t latency = 1;
    switch (op.kind) {
      case OpKind::Sleep:
        latency = static_cast<std::uint64_t>(op.imm);
        ++cs.pc;
        break;
      case OpKind::Load:
      case OpKind::SpinUntil: {
        const auto [value, lat] = do_load(c, op.addr, cs.pc);
        latency = lat;
        if (op.kind == OpKind::Load) {
          cs.regs[op.dst] = value.data;
          cs.reg_load[op.dst] = static_cast<std::int64_t>(cs.next_seq - 1);
          cs.reg_ts[op.dst] = last_ts_;
          ++cs.pc;
        } else if (value.data == op.imm) {
          ++cs.pc;
        }
        break;
      }
      case OpKind::Store: {
        SbEntry e;
        e.addr = op.addr;
        e.token = ValueToken{c, cs.stores++, op.imm + (op.src >= 0 ? cs.regs[op.src] : 0)};
        e.seq = cs.next_seq++;
        e.pc = cs.pc;
        if (op.src >= 0) {
          e.floor = cs.reg_ts[op.src];
          e.dep = cs.reg_load[op.src];
        }
        count_access(c);
        ++cs.pc;
        if (buffering()) {
          cs.sb.push_back(e);
        } else {
          latency = perform_store(c, e);
        }
        break;
      }
      case OpKind::Fence:
      case OpKind::Acquire:
      case OpKind::Release:
        sync_op(c, op.kind);
        ++cs.pc;
        break;
      case OpKind::BranchLt:
      case OpKind::Jump:
        throw std::logic_error("control op reached exec");
    }
    settle(c);
    return latency;
  }

  std::uint64_t drain(CoreId c, std::size_t index) {
    auto& sb = cores_[c].sb;
    const SbEntry e = sb.at(index);
    sb.erase(sb.begin() + static_cast<std::ptrdiff_t>(index));
    return perform_store(c, e);
  }

  Outcome outcome() const {
    Outcome out;
    for (const RegRef& r : prog_->observed) out.push_back(cores_[r.core].regs[r.reg]);
    return out;
  }

  ExecTrace sorted_trace() const {
    ExecTrace t = trace_;
    std::sort(t.begin(), t.end(),
              [](const TraceEntry& a, const TraceEntry& b) { return a.core != b.core ? a.core < b.core : a.seq < b.seq; });
    return t;
  }

  const AuditLog& audit() const {
    return std::visit([](const auto& p) -> const AuditLog& { return p.audit(); }, proto_);
  }
  const ProtocolStats& stats() const {
    return std::visit([](const auto& p) -> const ProtocolStats& { return p.stats(); }, proto_);
  }
  const Network& network() const {
    return std::visit([](const auto& p) -> const Network& { return p.network(); }, proto_);
  }

  void append_key(std::string& out) const {
    for (const auto& cs : cores_) {
      out += "pc" + std::to_string(cs.pc) + 'r';
      for (auto v : cs.regs) out += std::to_string(v) + ',';
      out += 'f';
      for (auto t : cs.reg_ts) out += std::to_string(t.value) + ',';
      const CoreClock& k = cs.clock;
      out += 'k' + std::to_string(k.pts.value) + '.' + std::to_string(k.lts.value) + '.' + std::to_string(k.sts.value) +
             '.' + std::to_string(k.acquirets.value) + '.' + std::to_string(k.releasets.value) + '.' +
             std::to_string(k.maxts.value);
      out += 'n' + std::to_string(cs.next_seq) + '.' + std::to_string(cs.stores) + '.' + std::to_string(cs.accesses);
      if (cs.detector) cs.detector->append_key(out);
      out += "sb";
      for (const auto& e : cs.sb)
        out += std::to_string(e.addr) + ':' + std::to_string(e.token.seq) + ':' + std::to_string(e.token.data) + ':' +
               std::to_string(e.floor.value) + ';';
      out += '|';
    }
    std::visit([&](const auto& p) { p.append_key(out); }, proto_);
  }

  std::string dump() const {
    std::ostringstream os;
    for (CoreId c = 0; c < num_cores(); ++c) {
      const CoreState& cs = cores_[c];
      os << "core " << c << ": pc=" << cs.pc << "/" << prog_->cores[c].size() << " sb=" << cs.sb.size()
         << " busy_until=" << cs.busy_until << " sb_busy_until=" << cs.sb_busy_until
         << " can_exec=" << can_exec(c) << '\n';
    }
    return os.str();
  }

  std::uint64_t step() const { return step_; }

 private:
  LivelockDetector* detector(CoreId c) { return cores_[c].detector ? &*cores_[c].detector : nullptr; }

  // Advances past branches and jumps so pc always names an executable op.
  void settle(CoreId c) {
    CoreState& cs = cores_[c];
    const auto& ops = prog_->cores[c];
    std::size_t guard = 0;
    while (cs.pc < ops.size()) {
      const MemOp& op = ops[cs.pc];
      if (op.kind == OpKind::BranchLt) {
        cs.pc = cs.regs[op.src] < op.imm ? op.target : cs.pc + 1;
      } else if (op.kind == OpKind::Jump) {
        cs.pc = op.target;
      } else {
        return;
      }
      if (++guard > ops.size() + 1) throw ConfigError("core " + std::to_string(c) + " loops without executing an op");
    }
  }

  void count_access(CoreId c) {
    CoreState& cs = cores_[c];
    if (++cs.accesses % cfg_->effective_period() == 0) {
      self_increment(cs.clock);
      ++cs.self_increments;
    }
  }

  void note_read_ts(CoreId c, Timestamp before) {
    CoreState& cs = cores_[c];
    if (cs.detector && cs.clock.read_ts() > before) cs.detector->reset_on_lts_advance();
  }

  Timestamp stamp(Timestamp ts) const { return cfg_->protocol == ProtocolKind::Directory ? Timestamp{} : ts; }

  std::pair<ValueToken, std::uint64_t> do_load(CoreId c, Addr addr, std::size_t pc) {
    CoreState& cs = cores_[c];
    TraceEntry e;
    e.core = c;
    e.seq = cs.next_seq++;
    e.pc = pc;
    e.kind = OpClass::Load;
    e.addr = addr;
    e.pt = ++step_;
    std::uint64_t latency = cfg_->proto.l1_latency;
    const Timestamp before = cs.clock.read_ts();

    auto fwd = std::find_if(cs.sb.rbegin(), cs.sb.rend(), [addr](const SbEntry& s) { return s.addr == addr; });
    if (fwd != cs.sb.rend()) {
      e.value = fwd->token;
      e.ts = cs.clock.read_ts();
      if (cs.clock.model == MemoryModel::RC) cs.clock.maxts = std::max(cs.clock.maxts, e.ts);
      e.path = AccessPath::Forward;
    } else {
      const AccessResult r = std::visit([&](auto& p) { return p.load(c, addr, cs.clock, detector(c), e.pt); }, proto_);
      e.value = r.value;
      e.ts = r.ts;
      e.path = r.path;
      latency = r.latency;
    }
    note_read_ts(c, before);
    count_access(c);
    last_ts_ = e.ts;
    e.ts = stamp(e.ts);
    if (cfg_->record_trace) trace_.push_back(e);
    return {e.value, latency};
  }

  std::uint64_t perform_store(CoreId c, const SbEntry& s) {
    CoreState& cs = cores_[c];
    TraceEntry e;
    e.core = c;
    e.seq = s.seq;
    e.pc = s.pc;
    e.kind = OpClass::Store;
    e.addr = s.addr;
    e.value = s.token;
    e.dep = s.dep;
    e.pt = ++step_;
    const Timestamp before = cs.clock.read_ts();
    const AccessResult r =
        std::visit([&](auto& p) { return p.store(c, s.addr, s.token, cs.clock, s.floor, e.pt); }, proto_);
    note_read_ts(c, before);
    e.ts = stamp(r.ts);
    e.path = r.path;
    if (cfg_->record_trace) trace_.push_back(e);
    return r.latency;
  }

  void sync_op(CoreId c, OpKind kind) {
    CoreState& cs = cores_[c];
    CoreClock& k = cs.clock;
    Timestamp ts;
    switch (k.model) {
      case MemoryModel::SC:
        ts = k.pts;
        break;
      case MemoryModel::TSO:
      case MemoryModel::PSO:
        ts = apply_fence(k);
        break;
      case MemoryModel::RC:
        if (kind == OpKind::Release) {
          ts = apply_release(k);
        } else if (kind == OpKind::Acquire) {
          ts = apply_acquire(k);
        } else {
          apply_release(k);
          ts = apply_acquire(k);
        }
        break;
    }
    TraceEntry e;
    e.core = c;
    e.seq = cs.next_seq++;
    e.pc = cs.pc;
    e.kind = kind == OpKind::Fence ? OpClass::Fence : kind == OpKind::Acquire ? OpClass::Acquire : OpClass::Release;
    e.ts = stamp(ts);
    e.pt = ++step_;
    if (cfg_->record_trace) trace_.push_back(e);
  }

  const EngineConfig* cfg_;
  const Program* prog_;
  Protocol proto_;
  std::vector<CoreState> cores_;
  ExecTrace trace_;
  std::uint64_t step_ = 0;
  Timestamp last_ts_;
  bool sync_stores_ = false;
};

MetricsReport build_metrics(const EngineConfig& cfg, const Program& prog, std::uint64_t seed, const Machine& m,
                            const ExecTrace& trace, std::uint64_t cycles) {
  MetricsReport r;
  r.program = prog.name;
  r.protocol = std::string(to_string(cfg.protocol));
  r.model = std::string(to_string(cfg.model));
  r.mesi = cfg.proto.mesi;
  r.lease_predictor = cfg.proto.lease_predictor;
  r.livelock_detector = cfg.livelock_detector;
  r.store_buffer = cfg.store_buffer;
  r.static_lease = cfg.proto.static_lease;
  r.self_increment_period = cfg.effective_period();
  r.seed = seed;
  r.cores = prog.num_cores();
  r.cycles = cycles;

  const ProtocolStats& s = m.stats();
  r.llc_accesses = s.llc_accesses;
  r.renew_requests = s.renew_requests;
  r.renew_success = s.renew_success;
  r.renew_failure = s.renew_failure;
  r.checks_sent = s.checks_sent;
  r.checks_updated = s.checks_updated;
  r.renew_rate = s.llc_accesses ? static_cast<double>(s.renew_requests) / static_cast<double>(s.llc_accesses) : 0.0;
  const TrafficLedger& ledger = m.network().ledger();
  for (std::size_t i = 0; i < kTrafficClasses; ++i) r.traffic[i] = ledger.by_class(static_cast<TrafficClass>(i));
  r.total_traffic = ledger.total();

  for (CoreId c = 0; c < m.num_cores(); ++c) r.self_increments += m.core(c).self_increments;
  std::uint64_t ops = 0;
  std::uint64_t max_ts = 0;
  for (const auto& e : trace) {
    if (e.is_memory()) ++ops;
    max_ts = std::max(max_ts, e.ts.value);
  }
  r.committed_ops = ops;
  r.max_ts = max_ts;
  r.ts_increase_rate = ops ? static_cast<double>(max_ts) / static_cast<double>(ops) : 0.0;
  return r;
}

}  // namespace

RunResult run(const EngineConfig& cfg, const Program& prog, std::uint64_t seed) {
  cfg.validate();
  if (prog.cores.empty()) throw ConfigError("program has no cores");
  Machine m(cfg, prog);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution skip(cfg.skip_prob);
  std::uint64_t cycle = 0;
  const int n = m.num_cores();

  auto note_finish = [&](CoreId c) {
    CoreState& cs = m.core(c);
    if (!cs.finished_recorded && m.program_done(c)) {
      cs.finished_recorded = true;
      cs.finish = cs.busy_until;
    }
  };

  // Scripted prefix: one op per entry, stores performed on the spot.
  if (!prog.schedule.empty()) {
    m.set_sync_stores(true);
    for (CoreId c : prog.schedule) {
      if (!m.can_exec(c)) throw ConfigError("schedule asks core " + std::to_string(c) + " to run past its program");
      const std::uint64_t lat = m.exec(c);
      cycle += std::max<std::uint64_t>(lat, 1);
      m.core(c).busy_until = cycle;
      note_finish(c);
    }
    m.set_sync_stores(false);
  }

  while (!m.all_done()) {
    if (cycle > cfg.max_cycles) {
      throw BudgetError("run exceeded max_cycles=" + std::to_string(cfg.max_cycles) + "\n" + m.dump());
    }
    bool progressed = false;
    bool skipped = false;
    const int start = static_cast<int>(cycle % static_cast<std::uint64_t>(n));
    for (int k = 0; k < n; ++k) {
      const CoreId c = (start + k) % n;
      CoreState& cs = m.core(c);
      const bool sb_ready = !cs.sb.empty() && cs.sb_busy_until <= cycle;
      const bool core_ready = cs.busy_until <= cycle && m.can_exec(c);
      if (!sb_ready && !core_ready) continue;
      if (cfg.skip_prob > 0.0 && skip(rng)) {
        skipped = true;
        continue;
      }
      if (sb_ready) {
        const auto options = m.drainable(c);
        const std::size_t pick =
            options.size() == 1 ? options[0]
                                : options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
        cs.sb_busy_until = cycle + std::max<std::uint64_t>(m.drain(c, pick), 1);
        progressed = true;
      }
      if (cs.busy_until <= cycle && m.can_exec(c)) {
        cs.busy_until = cycle + std::max<std::uint64_t>(m.exec(c), 1);
        note_finish(c);
        progressed = true;
      }
    }
    if (progressed || skipped) {
      ++cycle;
      continue;
    }
    // Nothing could act this cycle: jump to the next time something frees up.
    std::uint64_t next = UINT64_MAX;
    for (CoreId c = 0; c < n; ++c) {
      const CoreState& cs = m.core(c);
      if (cs.busy_until > cycle) next = std::min(next, cs.busy_until);
      if (!cs.sb.empty() && cs.sb_busy_until > cycle) next = std::min(next, cs.sb_busy_until);
    }
    if (next == UINT64_MAX) throw DeadlockError("no core can advance at cycle " + std::to_string(cycle) + "\n" + m.dump());
    cycle = next;
  }

  std::uint64_t end = cycle;
  RunResult out;
  for (CoreId c = 0; c < n; ++c) {
    const CoreState& cs = m.core(c);
    end = std::max({end, cs.busy_until, cs.sb_busy_until});
    out.regs.push_back(cs.regs);
    out.core_finish.push_back(cs.finish);
  }
  out.trace = m.sorted_trace();
  out.metrics = build_metrics(cfg, prog, seed, m, out.trace, end);
  out.audit = m.audit();
  out.stats = m.stats();
  out.traffic = m.network().ledger();
  out.messages = m.network().log();
  out.outcome = m.outcome();
  spdlog::debug("run {} seed {}: {} cycles, {} ops", prog.name, seed, end, out.metrics.committed_ops);
  return out;
}

EnumerateResult enumerate(const EngineConfig& cfg, const Program& prog) {
  cfg.validate();
  if (!prog.straight_line()) throw BudgetError("enumerate: program contains loops or spins");
  if (prog.ordering_ops() > kEnumerateOpLimit) {
    throw BudgetError("enumerate: " + std::to_string(prog.ordering_ops()) + " ops exceeds the limit of " +
                      std::to_string(kEnumerateOpLimit));
  }
  EngineConfig local = cfg;
  local.record_trace = true;

  EnumerateResult result;
  std::unordered_set<std::string> seen;
  std::string key;

  auto visit = [&](auto&& self, const Machine& m) -> void {
    key.clear();
    m.append_key(key);
    if (!seen.insert(key).second) return;
    ++result.states;

    if (m.all_done()) {
      ++result.terminals;
      result.outcomes.insert(m.outcome());
      const ExecTrace trace = m.sorted_trace();
      for (const auto& v : check_trace(trace, local.model)) result.violations.push_back(describe(v));
      for (const auto& v : m.audit().violations) result.violations.push_back(v);
      if (local.protocol == ProtocolKind::Tardis)
        for (const auto& v : scan_lemmas(trace, m.audit())) result.violations.push_back(describe(v));
      return;
    }
    bool any = false;
    for (CoreId c = 0; c < m.num_cores(); ++c) {
      if (m.can_exec(c)) {
        any = true;
        Machine next = m;
        next.exec(c);
        self(self, next);
      }
      for (std::size_t i : m.drainable(c)) {
        any = true;
        Machine next = m;
        next.drain(c, i);
        self(self, next);
      }
    }
    if (!any) result.violations.push_back("deadlock:\n" + m.dump());
  };

  local.proto.audit = true;
  Machine root(local, prog);
  visit(visit, root);
  return result;
}

}  // namespace tsim
