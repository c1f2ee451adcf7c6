#include "tsim/checker.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "tsim/errors.hpp"

namespace tsim {

namespace {

bool fence_like(OpClass k) { return k == OpClass::Fence || k == OpClass::Acquire || k == OpClass::Release; }
bool is_mem(OpClass k) { return k == OpClass::Load || k == OpClass::Store; }

std::string model_tag(MemoryModel m) {
  switch (m) {
    case MemoryModel::SC:
      return "SC";
    case MemoryModel::TSO:
      return "TSO";
    case MemoryModel::PSO:
      return "PSO";
    case MemoryModel::RC:
      return "RC";
  }
  return "?";
}

// (ts, pt) only; the tie-break key never matters for ops on one address.
bool before(Timestamp ts_a, std::uint64_t pt_a, Timestamp ts_b, std::uint64_t pt_b) {
  return ts_a < ts_b || (ts_a == ts_b && pt_a < pt_b);
}

std::string where(const TraceEntry& e) {
  std::ostringstream os;
  os << "c" << e.core << "#" << e.seq << ' ' << to_string(e.kind);
  if (e.is_memory()) os << " @" << e.addr << ' ' << e.value;
  os << " at " << e.physio();
  return os.str();
}

constexpr std::size_t kClasses = 5;

}  // namespace

bool po_ordered(MemoryModel model, OpClass a, OpClass b) {
  switch (model) {
    case MemoryModel::SC:
      return true;
    case MemoryModel::TSO:
      if (fence_like(a) || fence_like(b)) return true;
      return !(a == OpClass::Store && b == OpClass::Load);
    case MemoryModel::PSO:
      if (fence_like(a) || fence_like(b)) return true;
      return a == OpClass::Load;
    case MemoryModel::RC: {
      const bool rel_b = b == OpClass::Release || b == OpClass::Fence;
      const bool acq_a = a == OpClass::Acquire || a == OpClass::Fence;
      if (is_mem(a) && rel_b) return true;
      if (acq_a && is_mem(b)) return true;
      return fence_like(a) && fence_like(b);
    }
  }
  return true;
}

std::string describe(const Violation& v) {
  std::ostringstream os;
  os << v.rule << ": " << v.explanation << " [ops";
  for (auto i : v.ops) os << ' ' << i;
  os << ']';
  return os.str();
}

std::vector<Violation> check_trace(const ExecTrace& trace, MemoryModel model) {
  const std::string tag = model_tag(model);
  std::vector<Violation> out;

  for (std::size_t i = 1; i < trace.size(); ++i) {
    const auto& a = trace[i - 1];
    const auto& b = trace[i];
    if (a.core > b.core || (a.core == b.core && a.seq >= b.seq))
      throw TraceError("trace is not in per-core program order at index " + std::to_string(i));
  }

  // Conflicting accesses may never share both ts and pt.
  std::vector<std::size_t> mem;
  for (std::size_t i = 0; i < trace.size(); ++i)
    if (trace[i].is_memory()) mem.push_back(i);
  std::sort(mem.begin(), mem.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = trace[x];
    const auto& b = trace[y];
    if (a.ts != b.ts) return a.ts < b.ts;
    if (a.pt != b.pt) return a.pt < b.pt;
    return x < y;
  });
  for (std::size_t i = 0; i < mem.size();) {
    std::size_t j = i;
    while (j < mem.size() && trace[mem[j]].ts == trace[mem[i]].ts && trace[mem[j]].pt == trace[mem[i]].pt) ++j;
    for (std::size_t x = i; x < j; ++x)
      for (std::size_t y = x + 1; y < j; ++y) {
        const auto& a = trace[mem[x]];
        const auto& b = trace[mem[y]];
        if (a.addr == b.addr && (a.kind == OpClass::Store || b.kind == OpClass::Store))
          throw TraceError("conflicting ops share physiological time: " + where(a) + " and " + where(b));
      }
    i = j;
  }

  // Rule 1: program-order edges, checked against the running maximum of
  // each op class (and each address for same-address edges).
  {
    std::size_t i = 0;
    while (i < trace.size()) {
      const CoreId core = trace[i].core;
      std::array<std::optional<std::size_t>, kClasses> best{};
      std::map<Addr, std::array<std::optional<std::size_t>, 2>> best_addr;
      std::map<std::uint64_t, std::size_t> by_seq;
      auto later = [&](std::optional<std::size_t> cur, std::size_t cand) {
        return !cur || physio_less(trace[*cur].physio(), trace[cand].physio()) ? std::optional<std::size_t>(cand) : cur;
      };
      auto require = [&](std::optional<std::size_t> a, std::size_t b, const std::string& rule, const char* why) {
        if (!a) return;
        if (physio_less(trace[*a].physio(), trace[b].physio())) return;
        out.push_back(Violation{rule, {*a, b}, std::string(why) + ": " + where(trace[*a]) + " must precede " + where(trace[b])});
      };
      for (; i < trace.size() && trace[i].core == core; ++i) {
        const TraceEntry& b = trace[i];
        for (std::size_t k = 0; k < kClasses; ++k) {
          const auto a_cls = static_cast<OpClass>(k);
          if (!po_ordered(model, a_cls, b.kind)) continue;
          const bool fence_rule = model == MemoryModel::TSO && (fence_like(a_cls) || fence_like(b.kind));
          require(best[k], i, tag + (fence_rule ? "3" : "1"), "program order");
        }
        if (b.kind == OpClass::Store) {
          auto it = best_addr.find(b.addr);
          if (it != best_addr.end()) {
            require(it->second[0], i, tag + "1", "same-address load->store");
            require(it->second[1], i, tag + "1", "same-address store->store");
          }
          if (b.dep >= 0) {
            auto d = by_seq.find(static_cast<std::uint64_t>(b.dep));
            if (d != by_seq.end()) require(d->second, i, tag + "1", "data dependency");
          }
        }
        const auto k = static_cast<std::size_t>(b.kind);
        best[k] = later(best[k], i);
        if (b.is_memory()) {
          auto& slot = best_addr[b.addr][b.kind == OpClass::Load ? 0 : 1];
          slot = later(slot, i);
        }
        by_seq[b.seq] = i;
      }
    }
  }

  // Rule 2: each load returns the newest store among those before it in
  // memory order and (outside SC) the core's own program-earlier stores.
  std::map<Addr, std::vector<std::size_t>> stores;
  for (std::size_t i = 0; i < trace.size(); ++i)
    if (trace[i].kind == OpClass::Store) stores[trace[i].addr].push_back(i);
  for (auto& [addr, v] : stores)
    std::sort(v.begin(), v.end(),
              [&](std::size_t x, std::size_t y) { return physio_less(trace[x].physio(), trace[y].physio()); });

  std::map<std::pair<CoreId, Addr>, std::size_t> own_latest;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceEntry& e = trace[i];
    if (e.kind == OpClass::Store) {
      auto [it, fresh] = own_latest.try_emplace({e.core, e.addr}, i);
      if (!fresh && physio_less(trace[it->second].physio(), e.physio())) it->second = i;
      continue;
    }
    if (e.kind != OpClass::Load) continue;
    std::optional<std::size_t> source;
    if (auto it = stores.find(e.addr); it != stores.end()) {
      const auto& v = it->second;
      auto pos = std::partition_point(v.begin(), v.end(),
                                      [&](std::size_t s) { return physio_less(trace[s].physio(), e.physio()); });
      if (pos != v.begin()) source = *(pos - 1);
    }
    if (model != MemoryModel::SC) {
      if (auto own = own_latest.find({e.core, e.addr}); own != own_latest.end()) {
        if (!source || physio_less(trace[*source].physio(), trace[own->second].physio())) source = own->second;
      }
    }
    const ValueToken expected = source ? trace[*source].value : ValueToken::initial(e.addr);
    if (!expected.same_store(e.value) || expected.data != e.value.data) {
      Violation v;
      v.rule = tag + "2";
      v.ops = {i};
      if (source) v.ops.push_back(*source);
      std::ostringstream os;
      os << "load " << where(e) << " should return " << expected;
      v.explanation = os.str();
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::set<Outcome> oracle_outcomes(const Program& program, MemoryModel model) {
  if (!program.straight_line()) throw BudgetError("oracle: program contains loops or spins");
  if (program.ordering_ops() > kOracleOpLimit) {
    throw BudgetError("oracle: " + std::to_string(program.ordering_ops()) + " ops exceeds the limit of " +
                      std::to_string(kOracleOpLimit));
  }

  struct Node {
    CoreId core;
    OpClass cls;
    Addr addr;
    int dst;
    int src;
    std::int64_t imm;
    int src_load = -1;  // node id of the load feeding `src`
    int own_prev_store = -1;  // po-latest earlier store by this core to addr
    std::vector<int> preds;
  };
  std::vector<Node> nodes;
  for (CoreId c = 0; c < program.num_cores(); ++c) {
    std::vector<int> mine;
    std::array<int, kNumRegs> reg_writer;
    reg_writer.fill(-1);
    for (const MemOp& op : program.cores[c]) {
      OpClass cls;
      switch (op.kind) {
        case OpKind::Load:
          cls = OpClass::Load;
          break;
        case OpKind::Store:
          cls = OpClass::Store;
          break;
        case OpKind::Fence:
          cls = OpClass::Fence;
          break;
        case OpKind::Acquire:
          cls = OpClass::Acquire;
          break;
        case OpKind::Release:
          cls = OpClass::Release;
          break;
        default:
          continue;
      }
      // Outside RC, acquire and release act as full fences.
      if (model != MemoryModel::RC && fence_like(cls)) cls = OpClass::Fence;
      Node n{c, cls, op.addr, op.dst, op.src, op.imm, -1, -1, {}};
      const int id = static_cast<int>(nodes.size());
      if (cls == OpClass::Store && op.src >= 0) n.src_load = reg_writer[op.src];
      for (int a : mine) {
        const Node& pa = nodes[a];
        bool edge = po_ordered(model, pa.cls, cls);
        if (is_mem(pa.cls) && is_mem(cls) && pa.addr == n.addr && cls == OpClass::Store) edge = true;
        if (a == n.src_load) edge = true;
        if (edge) n.preds.push_back(a);
        if (pa.cls == OpClass::Store && is_mem(cls) && pa.addr == n.addr) n.own_prev_store = a;
      }
      if (cls == OpClass::Load) reg_writer[op.dst] = id;
      nodes.push_back(std::move(n));
      mine.push_back(id);
    }
  }

  const std::size_t total = nodes.size();
  std::vector<bool> placed(total, false);
  std::vector<int> rf(total, -1);  // store a load reads from; -1 = initial value
  std::map<Addr, int> latest;      // latest placed store per address
  std::set<Outcome> outcomes;

  auto evaluate = [&]() -> std::optional<Outcome> {
    // Values follow reads-from and register dependencies. A cycle would be
    // a value justifying itself; such executions are discarded.
    std::vector<int> state(total, 0);  // 0 new, 1 in progress, 2 done
    std::vector<std::int64_t> value(total, 0);
    std::function<bool(int)> eval = [&](int id) -> bool {
      if (state[id] == 2) return true;
      if (state[id] == 1) return false;
      state[id] = 1;
      const Node& n = nodes[id];
      if (n.cls == OpClass::Load) {
        if (rf[id] >= 0) {
          if (!eval(rf[id])) return false;
          value[id] = value[rf[id]];
        } else {
          value[id] = 0;
        }
      } else if (n.cls == OpClass::Store) {
        std::int64_t v = n.imm;
        if (n.src >= 0 && n.src_load >= 0) {
          if (!eval(n.src_load)) return false;
          v += value[n.src_load];
        }
        value[id] = v;
      }
      state[id] = 2;
      return true;
    };
    for (std::size_t i = 0; i < total; ++i)
      if (!eval(static_cast<int>(i))) return std::nullopt;

    Outcome o;
    for (const RegRef& r : program.observed) {
      std::int64_t v = 0;
      for (std::size_t i = 0; i < total; ++i)
        if (nodes[i].core == r.core && nodes[i].cls == OpClass::Load && nodes[i].dst == r.reg) v = value[i];
      o.push_back(v);
    }
    return o;
  };

  std::function<void(std::size_t)> dfs = [&](std::size_t count) {
    if (count == total) {
      if (auto o = evaluate()) outcomes.insert(*o);
      return;
    }
    for (std::size_t i = 0; i < total; ++i) {
      if (placed[i]) continue;
      const Node& n = nodes[i];
      if (!std::all_of(n.preds.begin(), n.preds.end(), [&](int p) { return placed[p]; })) continue;
      placed[i] = true;
      if (n.cls == OpClass::Load) {
        auto it = latest.find(n.addr);
        rf[i] = it == latest.end() ? -1 : it->second;
        if (model != MemoryModel::SC && n.own_prev_store >= 0 && !placed[n.own_prev_store]) rf[i] = n.own_prev_store;
        dfs(count + 1);
        rf[i] = -1;
      } else if (n.cls == OpClass::Store) {
        auto it = latest.find(n.addr);
        const std::optional<int> prev = it == latest.end() ? std::nullopt : std::optional<int>(it->second);
        latest[n.addr] = static_cast<int>(i);
        dfs(count + 1);
        if (prev) {
          latest[n.addr] = *prev;
        } else {
          latest.erase(n.addr);
        }
      } else {
        dfs(count + 1);
      }
      placed[i] = false;
    }
  };
  dfs(0);
  return outcomes;
}

std::vector<Violation> scan_lemmas(const ExecTrace& trace, const AuditLog& audit) {
  std::vector<Violation> out;
  struct Producer {
    Timestamp ts;
    std::uint64_t pt = 0;
  };
  std::map<std::pair<CoreId, std::uint64_t>, Producer> producers;
  std::map<Addr, std::vector<std::size_t>> stores;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceEntry& e = trace[i];
    if (e.kind != OpClass::Store) continue;
    producers[{e.value.writer, e.value.seq}] = Producer{e.ts, e.pt};
    stores[e.addr].push_back(i);
  }

  auto producer_of = [&](const ValueToken& v, Timestamp wts, std::uint64_t step, Addr addr) -> std::optional<Producer> {
    if (v.is_initial()) return Producer{wts, 0};
    auto it = producers.find({v.writer, v.seq});
    if (it == producers.end()) {
      out.push_back(Violation{"version-origin", {}, "step " + std::to_string(step) + " addr " + std::to_string(addr) +
                                               ": cached value has no committed producer"});
      return std::nullopt;
    }
    if (it->second.ts != wts) {
      std::ostringstream os;
      os << "step " << step << " addr " << addr << ": version wts " << wts << " but producer committed at ts "
         << it->second.ts;
      out.push_back(Violation{"version-origin", {}, os.str()});
    }
    return it->second;
  };

  for (const MasterObs& m : audit.masters) {
    const auto prod = producer_of(m.value, m.wts, m.step, m.addr);
    if (!prod) continue;
    auto it = stores.find(m.addr);
    if (it == stores.end()) continue;
    for (std::size_t s : it->second) {
      const TraceEntry& e = trace[s];
      if (e.pt > m.step) continue;
      if (before(m.wts, prod->pt, e.ts, e.pt)) {
        std::ostringstream os;
        os << "step " << m.step << " addr " << m.addr << ": master (wts " << m.wts << ") is older than committed "
           << where(e);
        out.push_back(Violation{"stale-master", {s}, os.str()});
      }
    }
  }

  for (const SnapshotObs& snap : audit.snapshots) {
    const auto prod = producer_of(snap.value, snap.wts, snap.step, snap.addr);
    if (!prod) continue;
    auto it = stores.find(snap.addr);
    if (it == stores.end()) continue;
    for (std::size_t s : it->second) {
      const TraceEntry& e = trace[s];
      if (before(snap.wts, prod->pt, e.ts, e.pt) && before(e.ts, e.pt, snap.rts, snap.step)) {
        std::ostringstream os;
        os << "step " << snap.step << " core " << snap.core << " addr " << snap.addr << ": snapshot [" << snap.wts
           << ", " << snap.rts << "] contains " << where(e);
        out.push_back(Violation{"snapshot-window", {s}, os.str()});
      }
    }
  }
  return out;
}

}  // namespace tsim
