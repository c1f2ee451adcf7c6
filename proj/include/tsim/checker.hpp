#pragma once

#include <set>
#include <string>
#include <vector>

#include "tsim/consistency.hpp"
#include "tsim/engine.hpp"
#include "tsim/protocol.hpp"
#include "tsim/workloads.hpp"

namespace tsim {

struct Violation {
  std::string rule;                 // e.g. "TSO1", "SC2", "snapshot-window"
  std::vector<std::size_t> ops;     // trace indices
  std::string explanation;
};

/// True when the model requires `a` to precede `b` in memory order, given
/// that `a` comes first in program order on the same core. Same-address
/// load/store and store/store pairs are always ordered; so are a load and
/// a store that consumes its register.
bool po_ordered(MemoryModel model, OpClass a, OpClass b);

/// Validates a committed trace against the model's axioms: program-order
/// edges and the load-value rule. Throws TraceError for malformed traces.
std::vector<Violation> check_trace(const ExecTrace& trace, MemoryModel model);

inline constexpr std::size_t kOracleOpLimit = 8;

/// Register outcomes allowed by the axioms, enumerated over every total
/// order consistent with the program-order edges. Straight-line programs
/// only; throws BudgetError beyond kOracleOpLimit ordering ops.
std::set<Outcome> oracle_outcomes(const Program& program, MemoryModel model);

/// Offline invariant scan over a Tardis run: every observed master version
/// is the newest committed store, no store falls inside any snapshot's
/// validity window, and each version's wts equals its producer's ts.
std::vector<Violation> scan_lemmas(const ExecTrace& trace, const AuditLog& audit);

std::string describe(const Violation& v);

}  // namespace tsim
