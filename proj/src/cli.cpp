#include "tsim/cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tsim/checker.hpp"
#include "tsim/config.hpp"
#include "tsim/errors.hpp"
#include "tsim/report.hpp"

namespace tsim {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

std::pair<std::string, std::string> split_kv(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

Program synth_from(const std::string& args) {
  SynthParams p;
  std::stringstream ss(args);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto [k, v] = split_kv(item);
    try {
      if (k == "cores") p.cores = std::stoi(v);
      else if (k == "ops") p.ops_per_core = static_cast<std::uint32_t>(std::stoul(v));
      else if (k == "lines") p.lines = static_cast<std::uint32_t>(std::stoul(v));
      else if (k == "write") p.write_fraction = std::stod(v);
      else if (k == "hot_lines") p.hot_lines = static_cast<std::uint32_t>(std::stoul(v));
      else if (k == "hot") p.hot_fraction = std::stod(v);
      else if (k == "private") p.private_fraction = std::stod(v);
      else if (k == "fence") p.fence_fraction = std::stod(v);
      else if (k == "dep") p.dependent_fraction = std::stod(v);
      else if (k == "seed") p.seed = std::stoull(v);
      else throw ConfigError("unknown synth parameter '" + k + "'");
    } catch (const std::logic_error&) {
      throw ConfigError("bad synth value '" + item + "'");
    }
  }
  return synth(p);
}

void setup_logging() {
  static bool done = false;
  if (done) return;
  done = true;
  auto logger = spdlog::stderr_color_mt("sim");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("SIM_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));
}

struct ConfigOpts {
  std::string config = "tardis-opt";
  std::vector<std::string> set;
  std::string model;
  std::string protocol;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config,-c", config, "preset name or config file")->capture_default_str();
    cmd->add_option("--set", set, "key=value override (repeatable)");
    cmd->add_option("--model", model, "sc|tso|pso|rc");
    cmd->add_option("--protocol", protocol, "tardis|directory");
  }
  EngineConfig build() const {
    auto ov = set;
    if (!protocol.empty()) ov.push_back("protocol=" + protocol);
    if (!model.empty()) ov.push_back("model=" + model);
    return resolve_config(config, ov);
  }
};

int cmd_run(const ConfigOpts& co, const std::string& program, std::uint64_t seed, const std::string& out_path,
            const std::string& csv_path, const std::string& trace_path, bool audit, std::ostream& out,
            std::ostream& err) {
  EngineConfig cfg = co.build();
  if (audit) cfg.proto.audit = true;
  const Program prog = resolve_program(program);
  const RunResult r = run(cfg, prog, seed);
  const std::string json = metrics_json(r.metrics);
  if (out_path.empty()) {
    out << json;
  } else {
    write_file(out_path, json);
  }
  if (!csv_path.empty()) write_file(csv_path, metrics_csv({r.metrics}));
  if (!trace_path.empty()) write_file(trace_path, trace_to_jsonl(r.trace));

  std::size_t bad = 0;
  for (const auto& v : check_trace(r.trace, cfg.model)) {
    err << describe(v) << '\n';
    ++bad;
  }
  for (const auto& v : r.audit.violations) {
    err << "audit: " << v << '\n';
    ++bad;
  }
  if (audit && cfg.protocol == ProtocolKind::Tardis) {
    for (const auto& v : scan_lemmas(r.trace, r.audit)) {
      err << describe(v) << '\n';
      ++bad;
    }
  }
  return bad ? 1 : 0;
}

int cmd_enumerate(const ConfigOpts& co, const std::string& program, bool oracle, std::ostream& out,
                  std::ostream& err) {
  const EngineConfig cfg = co.build();
  const Program prog = resolve_program(program);
  const EnumerateResult e = enumerate(cfg, prog);
  out << "program " << prog.name << " protocol " << to_string(cfg.protocol) << " model " << to_string(cfg.model)
      << '\n';
  out << "states " << e.states << " terminals " << e.terminals << '\n';
  for (const auto& o : e.outcomes) out << "  " << format_outcome(prog, o) << '\n';
  int rc = 0;
  for (const auto& v : e.violations) {
    err << v << '\n';
    rc = 1;
  }
  if (oracle && prog.ordering_ops() <= kOracleOpLimit) {
    const auto allowed = oracle_outcomes(prog, cfg.model);
    out << "oracle allows " << allowed.size() << " outcome(s)\n";
    for (const auto& o : e.outcomes) {
      if (!allowed.count(o)) {
        err << "outcome not allowed by " << to_string(cfg.model) << ": " << format_outcome(prog, o) << '\n';
        rc = 1;
      }
    }
    if (rc == 0) out << "engine outcomes are a subset of the oracle\n";
  }
  return rc;
}

int cmd_check(const std::string& trace_path, const std::string& model, std::ostream& out, std::ostream& err) {
  std::ifstream in(trace_path);
  if (!in) throw ConfigError("cannot open " + trace_path);
  ExecTrace trace = read_trace(in);
  std::stable_sort(trace.begin(), trace.end(), [](const TraceEntry& a, const TraceEntry& b) {
    return a.core != b.core ? a.core < b.core : a.seq < b.seq;
  });
  MemoryModel m;
  try {
    m = parse_model(model);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const auto vs = check_trace(trace, m);
  for (const auto& v : vs) err << describe(v) << '\n';
  out << trace.size() << " ops, " << vs.size() << " violation(s) under " << to_string(m) << '\n';
  return vs.empty() ? 0 : 1;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

int cmd_sweep(const ConfigOpts& co, const std::string& program, const std::string& param,
              const std::string& values, std::uint64_t seed, unsigned seeds, unsigned jobs,
              const std::string& out_path, std::ostream& out) {
  const Program prog = resolve_program(program);
  struct Job {
    EngineConfig cfg;
    std::uint64_t seed;
  };
  std::vector<Job> todo;
  for (const auto& v : split_csv(values)) {
    EngineConfig cfg = co.build();
    apply_setting(cfg, param, v);
    cfg.validate();
    for (unsigned s = 0; s < seeds; ++s) todo.push_back({cfg, seed + s});
  }
  std::vector<MetricsReport> reports(todo.size());
  // Each worker owns its engine; results land in fixed slots so the output
  // does not depend on scheduling.
  std::size_t next = 0;
  while (next < todo.size()) {
    std::vector<std::future<void>> batch;
    for (unsigned j = 0; j < std::max(1u, jobs) && next < todo.size(); ++j, ++next) {
      batch.push_back(std::async(std::launch::async, [&, i = next] {
        reports[i] = run(todo[i].cfg, prog, todo[i].seed).metrics;
      }));
    }
    for (auto& f : batch) f.get();
  }
  const std::string csv = metrics_csv(reports);
  if (out_path.empty()) {
    out << csv;
  } else {
    write_file(out_path, csv);
  }
  return 0;
}

int cmd_compare(const std::string& a_src, const std::string& b_src, const std::vector<std::string>& set,
                const std::string& program, std::uint64_t seed, std::ostream& out) {
  const Program prog = resolve_program(program);
  const EngineConfig a = resolve_config(a_src, set);
  const EngineConfig b = resolve_config(b_src, set);
  const MetricsReport ma = run(a, prog, seed).metrics;
  const MetricsReport mb = run(b, prog, seed).metrics;

  out << "program " << prog.name << " seed " << seed << ", normalized to " << a_src << '\n';
  out << std::left << std::setw(24) << "config" << std::right << std::setw(12) << "cycles" << std::setw(10)
      << "speedup" << std::setw(12) << "renew_rate";
  for (std::size_t i = 0; i < kTrafficClasses; ++i)
    out << std::setw(14) << to_string(static_cast<TrafficClass>(i));
  out << std::setw(12) << "total" << std::setw(10) << "traffic" << '\n';
  auto row = [&](const std::string& name, const MetricsReport& m) {
    const double speedup = m.cycles ? static_cast<double>(ma.cycles) / static_cast<double>(m.cycles) : 0.0;
    const double traffic = ma.total_traffic.flits
                               ? static_cast<double>(m.total_traffic.flits) / static_cast<double>(ma.total_traffic.flits)
                               : 0.0;
    out << std::left << std::setw(24) << name << std::right << std::setw(12) << m.cycles << std::setw(10)
        << std::fixed << std::setprecision(3) << speedup << std::setw(12) << std::setprecision(4) << m.renew_rate;
    for (const auto& t : m.traffic) out << std::setw(14) << t.flits;
    out << std::setw(12) << m.total_traffic.flits << std::setw(10) << std::setprecision(3) << traffic << '\n';
  };
  row(a_src, ma);
  row(b_src, mb);
  out << "(traffic columns in flits)\n";
  return 0;
}

}  // namespace

Program resolve_program(const std::string& spec) {
  if (spec == "synth") return synth_from("");
  if (spec.rfind("synth:", 0) == 0) return synth_from(spec.substr(6));
  const auto names = builtin_names();
  if (std::find(names.begin(), names.end(), spec) != names.end()) return builtin(spec);
  if (std::filesystem::exists(spec)) {
    return parse_program(read_file(spec), std::filesystem::path(spec).stem().string());
  }
  throw ConfigError("unknown program '" + spec + "' (not a builtin and no such file)");
}

EngineConfig resolve_config(const std::string& source, const std::vector<std::string>& overrides) {
  const auto& names = preset_names();
  EngineConfig cfg = std::find(names.begin(), names.end(), source) != names.end() ? preset(source)
                                                                                   : load_config_file(source);
  for (const auto& o : overrides) {
    auto [k, v] = split_kv(o);
    apply_setting(cfg, k, v);
  }
  cfg.validate();
  return cfg;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  setup_logging();
  CLI::App app{"Timestamp-coherence multicore simulator"};
  app.require_subcommand(1);

  ConfigOpts run_co, enum_co, sweep_co;
  std::string program = "fig1", out_path, csv_path, trace_path, model = "tso", param, values, a_src, b_src;
  std::vector<std::string> cmp_set;
  std::uint64_t seed = 1;
  unsigned seeds = 1, jobs = 1;
  bool audit = false, no_oracle = false;

  auto* run_cmd = app.add_subcommand("run", "simulate one program");
  run_co.add_to(run_cmd);
  run_cmd->add_option("--program,-p", program, "builtin, synth[:k=v,...] or file")->required();
  run_cmd->add_option("--seed,-s", seed)->capture_default_str();
  run_cmd->add_option("--out,-o", out_path, "metrics JSON path (default stdout)");
  run_cmd->add_option("--csv", csv_path, "metrics CSV path");
  run_cmd->add_option("--trace", trace_path, "trace JSON lines path");
  run_cmd->add_flag("--audit", audit, "record protocol invariants and scan them");

  auto* enum_cmd = app.add_subcommand("enumerate", "explore every interleaving of a small program");
  enum_co.add_to(enum_cmd);
  enum_cmd->add_option("--program,-p", program)->required();
  enum_cmd->add_flag("--no-oracle", no_oracle, "skip the axiomatic comparison");

  auto* check_cmd = app.add_subcommand("check", "validate a recorded trace against a model");
  check_cmd->add_option("--trace,-t", trace_path)->required();
  check_cmd->add_option("--model,-m", model)->capture_default_str();

  auto* sweep_cmd = app.add_subcommand("sweep", "run one program across values of a config key");
  sweep_co.add_to(sweep_cmd);
  sweep_cmd->add_option("--program,-p", program)->required();
  sweep_cmd->add_option("--param", param)->required();
  sweep_cmd->add_option("--values", values, "comma separated")->required();
  sweep_cmd->add_option("--seed,-s", seed)->capture_default_str();
  sweep_cmd->add_option("--seeds", seeds, "consecutive seeds per value")->capture_default_str();
  sweep_cmd->add_option("--jobs,-j", jobs, "parallel workers")->capture_default_str();
  sweep_cmd->add_option("--out,-o", out_path, "CSV path (default stdout)");

  auto* cmp_cmd = app.add_subcommand("compare", "run one program under two configs");
  cmp_cmd->add_option("--a", a_src, "baseline preset or file")->required();
  cmp_cmd->add_option("--b", b_src, "preset or file")->required();
  cmp_cmd->add_option("--set", cmp_set, "key=value applied to both");
  cmp_cmd->add_option("--program,-p", program)->required();
  cmp_cmd->add_option("--seed,-s", seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*run_cmd) return cmd_run(run_co, program, seed, out_path, csv_path, trace_path, audit, out, err);
    if (*enum_cmd) return cmd_enumerate(enum_co, program, !no_oracle, out, err);
    if (*check_cmd) return cmd_check(trace_path, model, out, err);
    if (*sweep_cmd) return cmd_sweep(sweep_co, program, param, values, seed, seeds, jobs, out_path, out);
    if (*cmp_cmd) return cmd_compare(a_src, b_src, cmp_set, program, seed, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ModelError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const TraceError& e) {
    err << "malformed trace: " << e.what() << '\n';
    return 2;
  } catch (const BudgetError& e) {
    err << "budget exceeded: " << e.what() << '\n';
    return 2;
  } catch (const DeadlockError& e) {
    err << "deadlock: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace tsim
