#include "tsim/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tsim/errors.hpp"

namespace tsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_uint(std::string_view key, std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(std::string(key) + ": expected an unsigned integer, got '" + std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError(std::string(key) + ": expected a boolean, got '" + std::string(v) + "'");
}

double parse_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const std::string s(v);
    const double d = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  }
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"directory", "tardis-base", "tardis-live", "tardis-opt"};
  return names;
}

EngineConfig preset(std::string_view name) {
  EngineConfig cfg;
  if (name == "directory") {
    cfg.protocol = ProtocolKind::Directory;
  } else if (name == "tardis-base") {
    cfg.proto.mesi = false;
  } else if (name == "tardis-live") {
    cfg.proto.mesi = false;
    cfg.livelock_detector = true;
  } else if (name == "tardis-opt") {
    cfg.livelock_detector = true;
    cfg.proto.lease_predictor = true;
  } else {
    throw ConfigError("unknown preset '" + std::string(name) + "'");
  }
  return cfg;
}

void apply_setting(EngineConfig& cfg, std::string_view key, std::string_view v) {
  auto& g = cfg.proto.geometry;
  if (key == "preset") {
    cfg = preset(v);
  } else if (key == "protocol") {
    try {
      cfg.protocol = parse_protocol(v);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "model") {
    try {
      cfg.model = parse_model(v);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "mesi") {
    cfg.proto.mesi = parse_bool(key, v);
  } else if (key == "static_lease") {
    cfg.proto.static_lease = parse_uint<std::uint32_t>(key, v);
  } else if (key == "lease_predictor") {
    cfg.proto.lease_predictor = parse_bool(key, v);
  } else if (key == "livelock_detector") {
    cfg.livelock_detector = parse_bool(key, v);
  } else if (key == "ahb_entries") {
    cfg.livelock.ahb_entries = parse_uint<std::uint32_t>(key, v);
  } else if (key == "thresh_min") {
    cfg.livelock.min_count = parse_uint<std::uint32_t>(key, v);
  } else if (key == "thresh_max") {
    cfg.livelock.max_count = parse_uint<std::uint32_t>(key, v);
  } else if (key == "check_thresh") {
    cfg.livelock.check_thresh = parse_uint<std::uint32_t>(key, v);
  } else if (key == "self_increment_period") {
    cfg.self_increment_period = parse_uint<std::uint64_t>(key, v);
  } else if (key == "store_buffer") {
    cfg.store_buffer = parse_bool(key, v);
  } else if (key == "sb_capacity") {
    cfg.sb_capacity = parse_uint<std::size_t>(key, v);
  } else if (key == "l1_kb") {
    g.l1_kb = parse_uint<std::uint32_t>(key, v);
  } else if (key == "l1_ways") {
    g.l1_ways = parse_uint<std::uint32_t>(key, v);
  } else if (key == "llc_kb") {
    g.llc_kb = parse_uint<std::uint32_t>(key, v);
  } else if (key == "llc_ways") {
    g.llc_ways = parse_uint<std::uint32_t>(key, v);
  } else if (key == "line_bytes") {
    g.line_bytes = parse_uint<std::uint32_t>(key, v);
  } else if (key == "hop_latency") {
    cfg.proto.hop_latency = parse_uint<std::uint32_t>(key, v);
  } else if (key == "l1_latency") {
    cfg.proto.l1_latency = parse_uint<std::uint32_t>(key, v);
  } else if (key == "llc_latency") {
    cfg.proto.llc_latency = parse_uint<std::uint32_t>(key, v);
  } else if (key == "dram_latency") {
    cfg.proto.dram_latency = parse_uint<std::uint32_t>(key, v);
  } else if (key == "skip_prob") {
    cfg.skip_prob = parse_double(key, v);
  } else if (key == "max_cycles") {
    cfg.max_cycles = parse_uint<std::uint64_t>(key, v);
  } else if (key == "audit") {
    cfg.proto.audit = parse_bool(key, v);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

EngineConfig parse_config(std::string_view text, EngineConfig base) {
  EngineConfig cfg = base;
  std::size_t lineno = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    try {
      apply_setting(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

EngineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const EngineConfig& cfg) {
  const auto& g = cfg.proto.geometry;
  std::ostringstream os;
  os << "protocol = " << to_string(cfg.protocol) << '\n'
     << "model = " << to_string(cfg.model) << '\n'
     << "mesi = " << cfg.proto.mesi << '\n'
     << "static_lease = " << cfg.proto.static_lease << '\n'
     << "lease_predictor = " << cfg.proto.lease_predictor << '\n'
     << "livelock_detector = " << cfg.livelock_detector << '\n'
     << "ahb_entries = " << cfg.livelock.ahb_entries << '\n'
     << "thresh_min = " << cfg.livelock.min_count << '\n'
     << "thresh_max = " << cfg.livelock.max_count << '\n'
     << "check_thresh = " << cfg.livelock.check_thresh << '\n'
     << "self_increment_period = " << cfg.self_increment_period << '\n'
     << "store_buffer = " << cfg.store_buffer << '\n'
     << "sb_capacity = " << cfg.sb_capacity << '\n'
     << "l1_kb = " << g.l1_kb << '\n'
     << "l1_ways = " << g.l1_ways << '\n'
     << "llc_kb = " << g.llc_kb << '\n'
     << "llc_ways = " << g.llc_ways << '\n'
     << "line_bytes = " << g.line_bytes << '\n'
     << "hop_latency = " << cfg.proto.hop_latency << '\n'
     << "l1_latency = " << cfg.proto.l1_latency << '\n'
     << "llc_latency = " << cfg.proto.llc_latency << '\n'
     << "dram_latency = " << cfg.proto.dram_latency << '\n'
     << "skip_prob = " << cfg.skip_prob << '\n'
     << "max_cycles = " << cfg.max_cycles << '\n'
     << "audit = " << cfg.proto.audit << '\n';
  return os.str();
}

}  // namespace tsim
