#pragma once

#include <compare>
#include <cstdint>
#include <ostream>

namespace tsim {

/// Logical tick. 64 bits wide; rollover is not modeled.
struct Timestamp {
  std::uint64_t value = 0;

  constexpr Timestamp() = default;
  constexpr explicit Timestamp(std::uint64_t v) : value(v) {}

  constexpr auto operator<=>(const Timestamp&) const = default;

  constexpr Timestamp operator+(std::uint64_t delta) const { return Timestamp{value + delta}; }
  constexpr Timestamp next() const { return Timestamp{value + 1}; }
};

inline std::ostream& operator<<(std::ostream& os, Timestamp ts) { return os << ts.value; }

using CoreId = int;

/// Key used to order two operations that share both ts and pt. Only
/// non-conflicting operations ever need it.
struct TieBreak {
  CoreId core = 0;
  std::uint64_t seq = 0;

  constexpr auto operator<=>(const TieBreak&) const = default;
};

/// A commit point in physiological time: logical timestamp first, then the
/// simulator step at which the operation committed.
struct PhysioTime {
  Timestamp ts;
  std::uint64_t pt = 0;
  TieBreak tie;

  constexpr bool operator==(const PhysioTime&) const = default;
};

constexpr bool physio_less(const PhysioTime& a, const PhysioTime& b) {
  if (a.ts != b.ts) return a.ts < b.ts;
  if (a.pt != b.pt) return a.pt < b.pt;
  return a.tie < b.tie;
}

/// Same (ts, pt) pair, ignoring the tie-break key.
constexpr bool physio_coincide(const PhysioTime& a, const PhysioTime& b) {
  return a.ts == b.ts && a.pt == b.pt;
}

inline std::ostream& operator<<(std::ostream& os, const PhysioTime& p) {
  return os << '(' << p.ts.value << ", " << p.pt << ')';
}

}  // namespace tsim
