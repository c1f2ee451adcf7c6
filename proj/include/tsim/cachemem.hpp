#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tsim/chrono.hpp"

namespace tsim {

/// Line address (line index, already line-aligned).
using Addr = std::uint64_t;

/// Identity of the store that produced a value, plus the data it wrote.
/// Two tokens name the same store iff writer and seq match.
struct ValueToken {
  static constexpr CoreId kInitialWriter = -1;

  CoreId writer = kInitialWriter;
  std::uint64_t seq = 0;  // per-core store number; the address for initial tokens
  std::int64_t data = 0;

  static ValueToken initial(Addr addr) { return ValueToken{kInitialWriter, addr, 0}; }

  bool is_initial() const { return writer == kInitialWriter; }
  bool same_store(const ValueToken& other) const { return writer == other.writer && seq == other.seq; }

  bool operator==(const ValueToken&) const = default;
};

std::ostream& operator<<(std::ostream& os, const ValueToken& token);

enum class L1State : std::uint8_t { I, S, E, M };

char to_char(L1State state);

struct CacheLine {
  Addr addr = 0;
  L1State state = L1State::I;
  Timestamp wts;
  Timestamp rts;
  ValueToken value;
  bool dirty = false;
  std::uint32_t lease = 0;  // lease granted with the line; echoed on renewal

  bool operator==(const CacheLine&) const = default;
};

struct LlcLine {
  Addr addr = 0;
  bool owned = false;
  CoreId owner = -1;
  Timestamp wts;
  Timestamp rts;
  ValueToken value;
  bool e_bit = false;
  std::uint32_t cur_lease = 0;  // lease predictor state
  bool dirty = false;           // differs from main memory

  bool operator==(const LlcLine&) const = default;
};

struct MemEntry {
  ValueToken value;
  Timestamp wts;
  Timestamp rts;
  std::uint32_t cur_lease = 0;  // 0 = never persisted

  bool operator==(const MemEntry&) const = default;
};

/// Flat simulated DRAM. Untouched addresses read as the initial token with
/// zero timestamps.
class MainMemory {
 public:
  MemEntry read(Addr addr) const;
  void write(Addr addr, const MemEntry& entry) { entries_[addr] = entry; }
  void append_key(std::string& out) const;

 private:
  std::map<Addr, MemEntry> entries_;
};

struct CacheGeometry {
  std::uint32_t l1_kb = 32;
  std::uint32_t l1_ways = 4;
  std::uint32_t llc_kb = 256;
  std::uint32_t llc_ways = 8;
  std::uint32_t line_bytes = 64;

  std::size_t l1_sets() const { return sets(l1_kb, l1_ways); }
  std::size_t llc_sets() const { return sets(llc_kb, llc_ways); }

  /// Throws ConfigError on a geometry that does not divide into whole sets.
  void validate() const;

 private:
  std::size_t sets(std::uint32_t kb, std::uint32_t ways) const {
    return static_cast<std::size_t>(kb) * 1024 / line_bytes / ways;
  }
};

/// Set-associative array with true LRU replacement. Storage is sparse: a set
/// only holds the lines actually installed in it.
template <class Line>
class SetAssocCache {
 public:
  SetAssocCache() = default;
  SetAssocCache(std::size_t sets, std::size_t ways) : ways_(ways), sets_(sets) {}

  std::size_t set_index(Addr addr) const { return static_cast<std::size_t>(addr % sets_.size()); }
  std::size_t ways() const { return ways_; }
  std::size_t num_sets() const { return sets_.size(); }

  Line* find(Addr addr) {
    for (auto& slot : sets_[set_index(addr)])
      if (slot.line.addr == addr) return &slot.line;
    return nullptr;
  }
  const Line* find(Addr addr) const {
    for (const auto& slot : sets_[set_index(addr)])
      if (slot.line.addr == addr) return &slot.line;
    return nullptr;
  }

  void touch(Addr addr) {
    for (auto& slot : sets_[set_index(addr)])
      if (slot.line.addr == addr) slot.stamp = ++clock_;
  }

  /// The line that must leave before addr can be installed, if any.
  std::optional<Line> victim_for(Addr addr) const {
    const auto& set = sets_[set_index(addr)];
    if (set.size() < ways_) return std::nullopt;
    const auto it = std::min_element(set.begin(), set.end(),
                                     [](const Slot& a, const Slot& b) { return a.stamp < b.stamp; });
    return it->line;
  }

  /// Installs a line; the set must have a free way.
  Line& insert(const Line& line) {
    auto& set = sets_[set_index(line.addr)];
    set.push_back(Slot{line, ++clock_});
    return set.back().line;
  }

  std::optional<Line> erase(Addr addr) {
    auto& set = sets_[set_index(addr)];
    for (auto it = set.begin(); it != set.end(); ++it) {
      if (it->line.addr == addr) {
        Line out = it->line;
        set.erase(it);
        return out;
      }
    }
    return std::nullopt;
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (const auto& set : sets_)
      for (const auto& slot : set) fn(slot.line);
  }

  /// Lines of each set in LRU order (oldest first); stamps themselves are
  /// left out so equivalent histories produce the same sequence.
  template <class Fn>
  void for_each_lru_ordered(Fn&& fn) const {
    std::vector<const Slot*> order;
    for (std::size_t s = 0; s < sets_.size(); ++s) {
      if (sets_[s].empty()) continue;
      order.clear();
      for (const auto& slot : sets_[s]) order.push_back(&slot);
      std::sort(order.begin(), order.end(), [](const Slot* a, const Slot* b) { return a->stamp < b->stamp; });
      for (const Slot* slot : order) fn(slot->line);
    }
  }

 private:
  struct Slot {
    Line line;
    std::uint64_t stamp = 0;
  };

  std::size_t ways_ = 1;
  std::vector<std::vector<Slot>> sets_;
  std::uint64_t clock_ = 0;
};

}  // namespace tsim
