#pragma once

#include <string_view>

#include "tsim/chrono.hpp"

namespace tsim {

enum class MemoryModel { SC, TSO, PSO, RC };

std::string_view to_string(MemoryModel model);
MemoryModel parse_model(std::string_view text);

/// Per-core timestamp registers. Which fields are live depends on the model:
/// SC uses pts; TSO and PSO use lts/sts; RC uses acquirets/releasets/maxts.
struct CoreClock {
  MemoryModel model = MemoryModel::SC;
  Timestamp pts;
  Timestamp lts;
  Timestamp sts;
  Timestamp acquirets;
  Timestamp releasets;
  Timestamp maxts;

  CoreClock() = default;
  explicit CoreClock(MemoryModel m) : model(m) {}

  /// Logical time at which the next ordinary load must find a valid lease.
  Timestamp read_ts() const;

  /// Largest timestamp held by any of the live registers.
  Timestamp high_water() const;

  bool operator==(const CoreClock&) const = default;
};

/// Commits a load against a line holding (line_wts, line_rts). The caller
/// must have made the load servable: dirty_by_self, or read_ts() <= line_rts.
Timestamp commit_load(CoreClock& clock, Timestamp line_wts, Timestamp line_rts, bool dirty_by_self);

/// Commits a store whose protocol-imposed minimum is required_floor.
Timestamp commit_store(CoreClock& clock, Timestamp required_floor);

/// TSO/PSO fence: lts = max(lts, sts). Throws ModelError under SC and RC.
Timestamp apply_fence(CoreClock& clock);

/// RC only. Throw ModelError under other models.
Timestamp apply_release(CoreClock& clock);
Timestamp apply_acquire(CoreClock& clock);

/// Periodic forced advance of the read-side clock (livelock avoidance).
void self_increment(CoreClock& clock);

}  // namespace tsim
