#include "tsim/consistency.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "tsim/errors.hpp"

namespace tsim {

std::string_view to_string(MemoryModel model) {
  switch (model) {
    case MemoryModel::SC:
      return "sc";
    case MemoryModel::TSO:
      return "tso";
    case MemoryModel::PSO:
      return "pso";
    case MemoryModel::RC:
      return "rc";
  }
  return "?";
}

MemoryModel parse_model(std::string_view text) {
  if (text == "sc" || text == "SC") return MemoryModel::SC;
  if (text == "tso" || text == "TSO") return MemoryModel::TSO;
  if (text == "pso" || text == "PSO") return MemoryModel::PSO;
  if (text == "rc" || text == "RC") return MemoryModel::RC;
  throw ConfigError("unknown memory model '" + std::string(text) + "' (expected sc|tso|pso|rc)");
}

Timestamp CoreClock::read_ts() const {
  switch (model) {
    case MemoryModel::SC:
      return pts;
    case MemoryModel::TSO:
    case MemoryModel::PSO:
      return lts;
    case MemoryModel::RC:
      return acquirets;
  }
  return pts;
}

Timestamp CoreClock::high_water() const {
  return std::max({pts, lts, sts, acquirets, releasets, maxts});
}

Timestamp commit_load(CoreClock& clock, Timestamp line_wts, Timestamp line_rts, bool dirty_by_self) {
  if (!dirty_by_self && clock.read_ts() > line_rts) {
    throw std::logic_error("commit_load: lease expired (read ts " + std::to_string(clock.read_ts().value) +
                           " > rts " + std::to_string(line_rts.value) + ")");
  }
  switch (clock.model) {
    case MemoryModel::SC:
      clock.pts = std::max(clock.pts, line_wts);
      return clock.pts;
    case MemoryModel::TSO:
    case MemoryModel::PSO:
      // A load of the core's own dirty data may sit below the data's wts.
      if (!dirty_by_self) clock.lts = std::max(clock.lts, line_wts);
      return clock.lts;
    case MemoryModel::RC: {
      const Timestamp ts = dirty_by_self ? clock.acquirets : std::max(clock.acquirets, line_wts);
      clock.maxts = std::max(clock.maxts, ts);
      return ts;
    }
  }
  return clock.pts;
}

Timestamp commit_store(CoreClock& clock, Timestamp required_floor) {
  switch (clock.model) {
    case MemoryModel::SC:
      clock.pts = std::max(clock.pts, required_floor);
      return clock.pts;
    case MemoryModel::TSO:
      clock.sts = std::max({clock.sts, clock.lts, required_floor});
      return clock.sts;
    case MemoryModel::PSO: {
      const Timestamp ts = std::max(clock.lts, required_floor);
      clock.sts = std::max(clock.sts, ts);
      return ts;
    }
    case MemoryModel::RC: {
      const Timestamp ts = std::max(clock.acquirets, required_floor);
      clock.maxts = std::max(clock.maxts, ts);
      return ts;
    }
  }
  return clock.pts;
}

Timestamp apply_fence(CoreClock& clock) {
  if (clock.model != MemoryModel::TSO && clock.model != MemoryModel::PSO) {
    throw ModelError("fence timestamp rule is defined for TSO and PSO only, not " +
                     std::string(to_string(clock.model)));
  }
  clock.lts = std::max(clock.lts, clock.sts);
  return clock.lts;
}

Timestamp apply_release(CoreClock& clock) {
  if (clock.model != MemoryModel::RC) throw ModelError("release is an RC operation");
  clock.releasets = std::max(clock.releasets, clock.maxts);
  return clock.releasets;
}

Timestamp apply_acquire(CoreClock& clock) {
  if (clock.model != MemoryModel::RC) throw ModelError("acquire is an RC operation");
  clock.acquirets = std::max(clock.acquirets, clock.releasets);
  // maxts covers the acquire itself so that a later release orders after it.
  clock.maxts = std::max(clock.maxts, clock.acquirets);
  return clock.acquirets;
}

void self_increment(CoreClock& clock) {
  switch (clock.model) {
    case MemoryModel::SC:
      clock.pts = clock.pts.next();
      break;
    case MemoryModel::TSO:
    case MemoryModel::PSO:
      clock.lts = clock.lts.next();
      break;
    case MemoryModel::RC:
      clock.acquirets = clock.acquirets.next();
      clock.maxts = std::max(clock.maxts, clock.acquirets);
      break;
  }
}

}  // namespace tsim
