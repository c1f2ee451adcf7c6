#include "tsim/workloads.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <random>
#include <sstream>

#include "tsim/errors.hpp"

namespace tsim {

std::string_view to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Load:
      return "Ld";
    case OpKind::Store:
      return "St";
    case OpKind::Fence:
      return "Fence";
    case OpKind::Acquire:
      return "Acq";
    case OpKind::Release:
      return "Rel";
    case OpKind::Sleep:
      return "Sleep";
    case OpKind::SpinUntil:
      return "SpinUntil";
    case OpKind::BranchLt:
      return "Blt";
    case OpKind::Jump:
      return "Jmp";
  }
  return "?";
}

bool Program::straight_line() const {
  for (const auto& ops : cores)
    for (const auto& op : ops)
      if (op.kind == OpKind::SpinUntil || op.kind == OpKind::BranchLt || op.kind == OpKind::Jump) return false;
  return true;
}

std::size_t Program::ordering_ops() const {
  std::size_t n = 0;
  for (const auto& ops : cores)
    for (const auto& op : ops)
      if (op.kind != OpKind::Sleep && op.kind != OpKind::BranchLt && op.kind != OpKind::Jump) ++n;
  return n;
}

std::string Program::addr_name(Addr addr) const {
  if (addr < addr_names.size()) return addr_names[addr];
  return "@" + std::to_string(addr);
}

std::string Program::reg_label(const RegRef& r) const {
  return "c" + std::to_string(r.core) + ".r" + std::to_string(r.reg);
}

std::string format_outcome(const Program& program, const Outcome& outcome) {
  std::string out;
  for (std::size_t i = 0; i < outcome.size() && i < program.observed.size(); ++i) {
    if (i) out += ' ';
    out += program.reg_label(program.observed[i]) + '=' + std::to_string(outcome[i]);
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

bool is_ident(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

class Parser {
 public:
  Parser(std::string_view text, std::string name) : text_(text) { prog_.name = std::move(name); }

  Program run() {
    std::istringstream in{std::string(text_)};
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_no_;
      if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
      const std::string line = trim(raw);
      if (line.empty()) continue;
      if (line.front() == '[') {
        section(line);
        continue;
      }
      switch (mode_) {
        case Mode::None:
          fail("statement outside of a section");
        case Mode::Core:
          core_stmt(line);
          break;
        case Mode::Init:
          init_stmt(line);
          break;
        case Mode::Schedule:
          schedule_stmt(line);
          break;
      }
    }
    finish_core();
    if (prog_.cores.empty()) throw ConfigError(prog_.name + ": program has no [core N] sections");
    for (std::size_t c = 0; c < prog_.cores.size(); ++c)
      if (!seen_core_[c]) throw ConfigError(prog_.name + ": missing section [core " + std::to_string(c) + "]");
    for (CoreId c : prog_.schedule)
      if (c < 0 || c >= prog_.num_cores()) throw ConfigError(prog_.name + ": schedule names unknown core " + std::to_string(c));
    for (const auto& il : prog_.init)
      for (CoreId c : il.cores)
        if (c < 0 || c >= prog_.num_cores()) throw ConfigError(prog_.name + ": [init] names unknown core " + std::to_string(c));
    return std::move(prog_);
  }

 private:
  enum class Mode { None, Core, Init, Schedule };

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(prog_.name + ":" + std::to_string(line_no_) + ": " + msg);
  }

  void section(const std::string& line) {
    if (line.back() != ']') fail("unterminated section header");
    finish_core();
    const auto words = split_ws(line.substr(1, line.size() - 2));
    if (words.size() == 2 && words[0] == "core") {
      const int c = parse_int(words[1]);
      if (c < 0 || c >= 64) fail("core id out of range");
      if (static_cast<std::size_t>(c) >= prog_.cores.size()) {
        prog_.cores.resize(c + 1);
        seen_core_.resize(c + 1, false);
      }
      if (seen_core_[c]) fail("duplicate section for core " + words[1]);
      seen_core_[c] = true;
      core_ = c;
      mode_ = Mode::Core;
    } else if (words.size() == 1 && words[0] == "init") {
      mode_ = Mode::Init;
    } else if (words.size() == 1 && words[0] == "schedule") {
      mode_ = Mode::Schedule;
    } else {
      fail("unknown section '" + line + "'");
    }
  }

  void finish_core() {
    if (mode_ != Mode::Core) return;
    auto& ops = prog_.cores[core_];
    for (auto& [index, label] : pending_targets_) {
      auto it = labels_.find(label);
      if (it == labels_.end()) throw ConfigError(prog_.name + ": core " + std::to_string(core_) + ": unknown label '" + label + "'");
      ops[index].target = it->second;
    }
    pending_targets_.clear();
    labels_.clear();
  }

  std::int64_t parse_int(const std::string& s) const {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(s, &pos, 10);
      if (pos != s.size()) fail("bad integer '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("bad integer '" + s + "'");
    }
  }

  int parse_reg(const std::string& s) const {
    if (s.size() < 2 || (s[0] != 'r' && s[0] != 'R')) fail("expected register, got '" + s + "'");
    const std::int64_t r = parse_int(s.substr(1));
    if (r < 0 || r >= kNumRegs) fail("register index out of range: " + s);
    return static_cast<int>(r);
  }

  Addr addr_of(const std::string& s) {
    if (!is_ident(s)) fail("bad address name '" + s + "'");
    auto it = std::find(prog_.addr_names.begin(), prog_.addr_names.end(), s);
    if (it != prog_.addr_names.end()) return static_cast<Addr>(it - prog_.addr_names.begin());
    prog_.addr_names.push_back(s);
    return prog_.addr_names.size() - 1;
  }

  void observe(int reg) {
    const RegRef r{core_, reg};
    if (std::find(prog_.observed.begin(), prog_.observed.end(), r) == prog_.observed.end()) prog_.observed.push_back(r);
  }

  void core_stmt(const std::string& line) {
    auto& ops = prog_.cores[core_];
    if (line.back() == ':') {
      const std::string label = trim(line.substr(0, line.size() - 1));
      if (!is_ident(label)) fail("bad label '" + label + "'");
      if (!labels_.emplace(label, ops.size()).second) fail("duplicate label '" + label + "'");
      return;
    }
    const auto w = split_ws(line);
    const std::string& op = w[0];
    MemOp m;
    if (op == "Ld") {
      if (w.size() != 4 || w[2] != "->") fail("expected 'Ld <addr> -> rN'");
      m.kind = OpKind::Load;
      m.addr = addr_of(w[1]);
      m.dst = parse_reg(w[3]);
      observe(m.dst);
    } else if (op == "St") {
      m.kind = OpKind::Store;
      if (w.size() < 2) fail("expected 'St <addr> [= value]'");
      m.addr = addr_of(w[1]);
      m.imm = 1;
      if (w.size() > 2) {
        if (w[2] != "=" || w.size() < 4) fail("expected '=' after store address");
        if (w[3][0] == 'r' || w[3][0] == 'R') {
          m.src = parse_reg(w[3]);
          m.imm = 0;
          if (w.size() == 6 && (w[4] == "+" || w[4] == "-")) {
            m.imm = parse_int(w[5]) * (w[4] == "-" ? -1 : 1);
          } else if (w.size() != 4) {
            fail("expected 'St <addr> = rN [+ k]'");
          }
        } else {
          if (w.size() != 4) fail("trailing tokens after store value");
          m.imm = parse_int(w[3]);
        }
      }
    } else if (op == "Fence" || op == "Acq" || op == "Rel") {
      if (w.size() != 1) fail("unexpected operand to " + op);
      m.kind = op == "Fence" ? OpKind::Fence : op == "Acq" ? OpKind::Acquire : OpKind::Release;
    } else if (op == "Sleep") {
      if (w.size() != 2) fail("expected 'Sleep n'");
      m.kind = OpKind::Sleep;
      m.imm = parse_int(w[1]);
      if (m.imm < 0) fail("negative sleep");
    } else if (op == "SpinUntil") {
      if (w.size() != 4 || w[2] != "==") fail("expected 'SpinUntil <addr> == v'");
      m.kind = OpKind::SpinUntil;
      m.addr = addr_of(w[1]);
      m.imm = parse_int(w[3]);
    } else if (op == "Blt") {
      if (w.size() != 4) fail("expected 'Blt rN imm label'");
      m.kind = OpKind::BranchLt;
      m.src = parse_reg(w[1]);
      m.imm = parse_int(w[2]);
      pending_targets_.emplace_back(ops.size(), w[3]);
    } else if (op == "Jmp") {
      if (w.size() != 2) fail("expected 'Jmp label'");
      m.kind = OpKind::Jump;
      pending_targets_.emplace_back(ops.size(), w[1]);
    } else {
      fail("unknown op '" + op + "'");
    }
    ops.push_back(m);
  }

  void init_stmt(const std::string& line) {
    const auto w = split_ws(line);
    InitLine il;
    il.addr = addr_of(w[0]);
    for (std::size_t i = 1; i < w.size(); ++i) {
      const auto eq = w[i].find('=');
      if (eq == std::string::npos) fail("expected key=value in [init]");
      const std::string key = w[i].substr(0, eq);
      const std::string val = w[i].substr(eq + 1);
      if (key == "wts") {
        il.wts = Timestamp{static_cast<std::uint64_t>(parse_int(val))};
      } else if (key == "rts") {
        il.rts = Timestamp{static_cast<std::uint64_t>(parse_int(val))};
      } else if (key == "cores") {
        std::istringstream is(val);
        for (std::string c; std::getline(is, c, ',');)
          if (!c.empty()) il.cores.push_back(static_cast<CoreId>(parse_int(c)));
      } else {
        fail("unknown [init] key '" + key + "'");
      }
    }
    if (il.wts > il.rts) fail("[init] needs wts <= rts");
    prog_.init.push_back(il);
  }

  void schedule_stmt(std::string line) {
    std::replace(line.begin(), line.end(), ',', ' ');
    for (const auto& t : split_ws(line)) prog_.schedule.push_back(static_cast<CoreId>(parse_int(t)));
  }

  std::string_view text_;
  Program prog_;
  Mode mode_ = Mode::None;
  int line_no_ = 0;
  CoreId core_ = 0;
  std::vector<bool> seen_core_;
  std::map<std::string, std::size_t> labels_;
  std::vector<std::pair<std::size_t, std::string>> pending_targets_;
};

// Builtin sources. Store values default to 1 when omitted.
const std::map<std::string, std::string>& builtin_sources() {
  static const std::map<std::string, std::string> sources = {
      {"fig1", R"(
[init]
A wts=0 rts=0
B wts=0 rts=0
[core 0]
St A = 1
Ld B -> r1
[core 1]
St B = 1
Ld A -> r2
[schedule]
0 0 1 1
)"},
      {"fig2", R"(
[init]
A wts=0 rts=5 cores=0,1
B wts=0 rts=10 cores=0,1
[core 0]
St B = 1
Ld B -> r1
Ld A -> r2
[core 1]
St A = 2
Fence
Ld B -> r3
[schedule]
0 1 0 1 0 1
)"},
      {"listing1", R"(
[core 0]
St A = 1
Ld B -> r1
[core 1]
St B = 1
Ld A -> r2
)"},
      {"dekker_fenced", R"(
[core 0]
St A = 1
Fence
Ld B -> r1
[core 1]
St B = 1
Fence
Ld A -> r2
)"},
      {"listing2", R"(
[core 0]
St B = 1
Ld B -> r1
Ld A -> r2
[core 1]
St A = 2
Fence
Ld B -> r3
)"},
      {"mp", R"(
[core 0]
St A = 1
St B = 1
[core 1]
Ld B -> r1
Ld A -> r2
)"},
      {"mp_fenced", R"(
[core 0]
St A = 1
Fence
St B = 1
[core 1]
Ld B -> r1
Fence
Ld A -> r2
)"},
      {"mp_relacq", R"(
[core 0]
St A = 1
Rel
St B = 1
[core 1]
Ld B -> r1
Acq
Ld A -> r2
)"},
      {"lb", R"(
[core 0]
Ld A -> r1
St B = 1
[core 1]
Ld B -> r2
St A = 1
)"},
      {"lb_dep", R"(
[core 0]
Ld A -> r1
St B = r1 + 1
[core 1]
Ld B -> r2
St A = r2 + 1
)"},
      {"iriw", R"(
[core 0]
St A = 1
[core 1]
St B = 1
[core 2]
Ld A -> r1
Ld B -> r2
[core 3]
Ld B -> r3
Ld A -> r4
)"},
      {"2+2w", R"(
[core 0]
St A = 1
St B = 2
Ld B -> r1
[core 1]
St B = 1
St A = 2
Ld A -> r2
)"},
      {"corr", R"(
[core 0]
St A = 1
[core 1]
Ld A -> r1
Ld A -> r2
)"},
      {"cowr", R"(
[core 0]
St A = 1
Ld A -> r1
[core 1]
St A = 2
Ld A -> r2
)"},
      {"wrc", R"(
[core 0]
St A = 1
[core 1]
Ld A -> r1
St B = r1 + 0
[core 2]
Ld B -> r2
Ld A -> r3
)"},
      {"sb3", R"(
[core 0]
St A = 1
Ld B -> r1
[core 1]
St B = 1
Ld C -> r2
[core 2]
St C = 1
Ld A -> r3
)"},
      {"r", R"(
[core 0]
St A = 1
St B = 1
[core 1]
St B = 2
Ld A -> r1
)"},
      {"single_core", R"(
[core 0]
St A = 1
Ld A -> r1
St B = r1 + 1
Ld B -> r2
)"},
  };
  return sources;
}

const std::vector<std::string>& litmus_list() {
  static const std::vector<std::string> names = {"listing1", "dekker_fenced", "listing2", "mp",   "mp_fenced",
                                                 "mp_relacq", "lb",           "lb_dep",   "iriw", "2+2w",
                                                 "corr",      "cowr",         "wrc",      "sb3",  "r",
                                                 "single_core"};
  return names;
}

constexpr std::uint32_t kDefaultSpinDelay = 30000;
constexpr std::uint32_t kDefaultLeaseIterations = 128;

}  // namespace

Program parse_program(std::string_view text, std::string name) { return Parser(text, std::move(name)).run(); }

std::string format_program(const Program& p) {
  std::ostringstream os;
  if (!p.init.empty()) {
    os << "[init]\n";
    for (const auto& il : p.init) {
      os << p.addr_name(il.addr) << " wts=" << il.wts << " rts=" << il.rts;
      if (!il.cores.empty()) {
        os << " cores=";
        for (std::size_t i = 0; i < il.cores.size(); ++i) os << (i ? "," : "") << il.cores[i];
      }
      os << '\n';
    }
  }
  for (std::size_t c = 0; c < p.cores.size(); ++c) {
    os << "[core " << c << "]\n";
    const auto& ops = p.cores[c];
    std::vector<bool> is_target(ops.size() + 1, false);
    for (const auto& op : ops)
      if (op.kind == OpKind::BranchLt || op.kind == OpKind::Jump) is_target[op.target] = true;
    for (std::size_t i = 0; i <= ops.size(); ++i) {
      if (is_target[i]) os << "L" << i << ":\n";
      if (i == ops.size()) break;
      const MemOp& op = ops[i];
      switch (op.kind) {
        case OpKind::Load:
          os << "Ld " << p.addr_name(op.addr) << " -> r" << op.dst;
          break;
        case OpKind::Store:
          os << "St " << p.addr_name(op.addr) << " = ";
          if (op.src >= 0) {
            os << 'r' << op.src << (op.imm < 0 ? " - " : " + ") << (op.imm < 0 ? -op.imm : op.imm);
          } else {
            os << op.imm;
          }
          break;
        case OpKind::Fence:
        case OpKind::Acquire:
        case OpKind::Release:
          os << to_string(op.kind);
          break;
        case OpKind::Sleep:
          os << "Sleep " << op.imm;
          break;
        case OpKind::SpinUntil:
          os << "SpinUntil " << p.addr_name(op.addr) << " == " << op.imm;
          break;
        case OpKind::BranchLt:
          os << "Blt r" << op.src << ' ' << op.imm << " L" << op.target;
          break;
        case OpKind::Jump:
          os << "Jmp L" << op.target;
          break;
      }
      os << '\n';
    }
  }
  if (!p.schedule.empty()) {
    os << "[schedule]\n";
    for (std::size_t i = 0; i < p.schedule.size(); ++i) os << (i ? " " : "") << p.schedule[i];
    os << '\n';
  }
  return os.str();
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> names = {"fig1", "fig2", "spin", "lease_case"};
  for (const auto& n : litmus_list()) names.push_back(n);
  return names;
}

std::vector<std::string> litmus_names() { return litmus_list(); }

Program spin_program(std::uint32_t delay) {
  std::ostringstream os;
  os << "[core 0]\n"
        "Sleep 20\n"
        "spin:\n"
        "Ld done -> r1\n"
        "Sleep 1\n"
        "Blt r1 1 spin\n"
        "[core 1]\n"
        "Ld done -> r2\n"
        "Sleep "
     << delay << "\nSt done = 1\n";
  return parse_program(os.str(), "spin");
}

Program lease_case_program(std::uint32_t iterations) {
  std::ostringstream os;
  for (int c = 0; c < 2; ++c) {
    os << "[core " << c << "]\n";
    for (std::uint32_t i = 0; i < iterations; ++i) os << "Ld A -> r1\nLd B -> r2\nSt B = r2 + 1\nFence\n";
  }
  return parse_program(os.str(), "lease_case");
}

Program builtin(const std::string& name) {
  if (name == "spin") return spin_program(kDefaultSpinDelay);
  if (name == "lease_case") return lease_case_program(kDefaultLeaseIterations);
  const auto& sources = builtin_sources();
  auto it = sources.find(name);
  if (it == sources.end()) throw ConfigError("unknown builtin program '" + name + "'");
  return parse_program(it->second, name);
}

Program synth(const SynthParams& p) {
  if (p.cores < 1 || p.cores > 64) throw ConfigError("synth: cores must be in [1, 64]");
  if (p.lines == 0 || p.hot_lines > p.lines) throw ConfigError("synth: need 0 < lines and hot_lines <= lines");
  for (double f : {p.write_fraction, p.hot_fraction, p.private_fraction, p.fence_fraction, p.dependent_fraction})
    if (f < 0.0 || f > 1.0) throw ConfigError("synth: fractions must lie in [0, 1]");
  if (p.hot_fraction + p.private_fraction > 1.0) throw ConfigError("synth: hot + private fraction exceeds 1");

  Program prog;
  prog.name = "synth";
  for (std::uint32_t i = 0; i < p.lines; ++i) prog.addr_names.push_back("x" + std::to_string(i));
  prog.cores.resize(p.cores);

  const std::uint32_t rest = p.lines - p.hot_lines;
  const std::uint32_t region = rest / (2 * static_cast<std::uint32_t>(p.cores));
  const std::uint32_t shared_base = p.hot_lines + region * p.cores;

  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](std::uint32_t lo, std::uint32_t n) {
    return static_cast<Addr>(lo + std::uniform_int_distribution<std::uint32_t>(0, n - 1)(rng));
  };

  for (int c = 0; c < p.cores; ++c) {
    auto& ops = prog.cores[c];
    int last_loaded = -1;
    for (std::uint32_t i = 0; i < p.ops_per_core; ++i) {
      MemOp m;
      const double f = unit(rng);
      if (f < p.fence_fraction) {
        const int k = std::uniform_int_distribution<int>(0, 2)(rng);
        m.kind = k == 0 ? OpKind::Fence : k == 1 ? OpKind::Acquire : OpKind::Release;
        ops.push_back(m);
        continue;
      }
      const double where = unit(rng);
      if (where < p.hot_fraction && p.hot_lines > 0) {
        m.addr = pick(0, p.hot_lines);
      } else if (where < p.hot_fraction + p.private_fraction && region > 0) {
        m.addr = pick(p.hot_lines + region * c, region);
      } else if (shared_base < p.lines) {
        m.addr = pick(shared_base, p.lines - shared_base);
      } else {
        m.addr = pick(0, p.lines);
      }
      if (unit(rng) < p.write_fraction) {
        m.kind = OpKind::Store;
        if (last_loaded >= 0 && unit(rng) < p.dependent_fraction) {
          m.src = last_loaded;
          m.imm = 1;
        } else {
          m.imm = static_cast<std::int64_t>(i) + 1;
        }
      } else {
        m.kind = OpKind::Load;
        m.dst = 1 + static_cast<int>(i % (kNumRegs - 1));
        last_loaded = m.dst;
      }
      ops.push_back(m);
    }
  }
  return prog;
}

}  // namespace tsim
