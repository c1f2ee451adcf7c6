#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsim/cachemem.hpp"
#include "tsim/chrono.hpp"

namespace tsim {

inline constexpr int kNumRegs = 16;

enum class OpKind : std::uint8_t { Load, Store, Fence, Acquire, Release, Sleep, SpinUntil, BranchLt, Jump };

std::string_view to_string(OpKind kind);

/// One static instruction. Field use depends on kind:
///   Load:       addr, dst
///   Store:      addr, imm (+ value of src when src >= 0)
///   Sleep:      imm cycles
///   SpinUntil:  addr, imm (loop until the loaded value equals imm)
///   BranchLt:   src, imm, target (jump when reg[src] < imm)
///   Jump:       target
struct MemOp {
  OpKind kind = OpKind::Load;
  Addr addr = 0;
  int dst = -1;
  int src = -1;
  std::int64_t imm = 0;
  std::size_t target = 0;

  bool is_memory() const { return kind == OpKind::Load || kind == OpKind::Store || kind == OpKind::SpinUntil; }
  bool operator==(const MemOp&) const = default;
};

/// Line present in S state before the run starts (see LinePreset).
struct InitLine {
  Addr addr = 0;
  Timestamp wts;
  Timestamp rts;
  std::vector<CoreId> cores;
};

struct RegRef {
  CoreId core = 0;
  int reg = 0;
  bool operator==(const RegRef&) const = default;
};

struct Program {
  std::string name;
  std::vector<std::vector<MemOp>> cores;
  std::vector<std::string> addr_names;  // index = line address
  std::vector<InitLine> init;
  std::vector<CoreId> schedule;   // optional scripted interleaving, one op per entry
  std::vector<RegRef> observed;   // registers that make up an outcome

  int num_cores() const { return static_cast<int>(cores.size()); }
  std::size_t num_lines() const { return addr_names.size(); }
  /// True when no op can execute more than once.
  bool straight_line() const;
  /// Loads, stores, fences, acquires and releases, counted statically.
  std::size_t ordering_ops() const;
  std::string addr_name(Addr addr) const;
  std::string reg_label(const RegRef& r) const;
};

/// Final values of Program::observed, in that order.
using Outcome = std::vector<std::int64_t>;

std::string format_outcome(const Program& program, const Outcome& outcome);

/// Parses the text program format. Throws ConfigError with a line number on
/// malformed input.
Program parse_program(std::string_view text, std::string name = "program");

/// Renders a program back into the text format.
std::string format_program(const Program& program);

std::vector<std::string> builtin_names();
std::vector<std::string> litmus_names();

/// Named program: fig1, fig2, spin, lease_case, or a litmus test.
/// Throws ConfigError for an unknown name.
Program builtin(const std::string& name);

/// Spin variant with an explicit delay before the releasing store.
Program spin_program(std::uint32_t delay);

/// Two-core lease case study unrolled for `iterations` rounds.
Program lease_case_program(std::uint32_t iterations);

struct SynthParams {
  int cores = 4;
  std::uint32_t ops_per_core = 200;
  std::uint32_t lines = 64;        // total footprint
  double write_fraction = 0.3;
  std::uint32_t hot_lines = 4;     // shared hot set at the start of the footprint
  double hot_fraction = 0.3;       // share of accesses going to the hot set
  double private_fraction = 0.3;   // share going to the core's own region
  double fence_fraction = 0.02;    // Fence / Acq / Rel mix
  double dependent_fraction = 0.1; // stores that write a loaded register + 1
  std::uint64_t seed = 1;
};

/// Seeded random straight-line workload. Throws ConfigError on bad params.
Program synth(const SynthParams& params);

}  // namespace tsim
