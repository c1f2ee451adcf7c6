#include "tsim/report.hpp"

#include <iomanip>
#include <istream>
#include <sstream>

#include "json.hpp"
#include "tsim/errors.hpp"

namespace tsim {

namespace {

using ordered_json = nlohmann::ordered_json;

template <typename E, std::size_t N>
E enum_from(std::string_view s, const char* what) {
  for (std::size_t i = 0; i < N; ++i)
    if (to_string(static_cast<E>(i)) == s) return static_cast<E>(i);
  throw TraceError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

std::string fixed(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

std::string metrics_json(const MetricsReport& m) {
  ordered_json j;
  j["program"] = m.program;
  j["protocol"] = m.protocol;
  j["model"] = m.model;
  j["mesi"] = m.mesi;
  j["lease_predictor"] = m.lease_predictor;
  j["livelock_detector"] = m.livelock_detector;
  j["store_buffer"] = m.store_buffer;
  j["static_lease"] = m.static_lease;
  j["self_increment_period"] = m.self_increment_period;
  j["seed"] = m.seed;
  j["cores"] = m.cores;
  j["cycles"] = m.cycles;
  j["committed_ops"] = m.committed_ops;
  j["llc_accesses"] = m.llc_accesses;
  j["renew_requests"] = m.renew_requests;
  j["renew_success"] = m.renew_success;
  j["renew_failure"] = m.renew_failure;
  j["checks_sent"] = m.checks_sent;
  j["checks_updated"] = m.checks_updated;
  j["self_increments"] = m.self_increments;
  j["renew_rate"] = m.renew_rate;
  ordered_json traffic;
  for (std::size_t i = 0; i < kTrafficClasses; ++i) {
    const auto& t = m.traffic[i];
    traffic[std::string(to_string(static_cast<TrafficClass>(i)))] = {
        {"messages", t.messages}, {"flits", t.flits}, {"flit_hops", t.flit_hops}};
  }
  traffic["total"] = {{"messages", m.total_traffic.messages},
                      {"flits", m.total_traffic.flits},
                      {"flit_hops", m.total_traffic.flit_hops}};
  j["traffic"] = traffic;
  j["max_ts"] = m.max_ts;
  j["ts_increase_rate"] = m.ts_increase_rate;
  return j.dump(2) + "\n";
}

std::string metrics_csv_header() {
  std::ostringstream os;
  os << "program,protocol,model,mesi,lease_predictor,livelock_detector,store_buffer,static_lease,"
        "self_increment_period,seed,cores,cycles,committed_ops,llc_accesses,renew_requests,renew_success,"
        "renew_failure,checks_sent,checks_updated,self_increments,renew_rate";
  for (std::size_t i = 0; i < kTrafficClasses; ++i) {
    const auto name = to_string(static_cast<TrafficClass>(i));
    os << ',' << name << "_flits," << name << "_flit_hops";
  }
  os << ",total_flits,total_flit_hops,max_ts,ts_increase_rate";
  return os.str();
}

std::string metrics_csv_row(const MetricsReport& m) {
  std::ostringstream os;
  os << m.program << ',' << m.protocol << ',' << m.model << ',' << m.mesi << ',' << m.lease_predictor << ','
     << m.livelock_detector << ',' << m.store_buffer << ',' << m.static_lease << ',' << m.self_increment_period
     << ',' << m.seed << ',' << m.cores << ',' << m.cycles << ',' << m.committed_ops << ',' << m.llc_accesses << ','
     << m.renew_requests << ',' << m.renew_success << ',' << m.renew_failure << ',' << m.checks_sent << ','
     << m.checks_updated << ',' << m.self_increments << ',' << fixed(m.renew_rate);
  for (const auto& t : m.traffic) os << ',' << t.flits << ',' << t.flit_hops;
  os << ',' << m.total_traffic.flits << ',' << m.total_traffic.flit_hops << ',' << m.max_ts << ','
     << fixed(m.ts_increase_rate);
  return os.str();
}

std::string metrics_csv(const std::vector<MetricsReport>& reports) {
  std::string out = metrics_csv_header() + "\n";
  for (const auto& r : reports) out += metrics_csv_row(r) + "\n";
  return out;
}

void write_trace(std::ostream& out, const ExecTrace& trace) {
  for (const TraceEntry& e : trace) {
    ordered_json j;
    j["core"] = e.core;
    j["seq"] = e.seq;
    j["pc"] = e.pc;
    j["kind"] = to_string(e.kind);
    j["addr"] = e.addr;
    j["writer"] = e.value.writer;
    j["wseq"] = e.value.seq;
    j["data"] = e.value.data;
    j["ts"] = e.ts.value;
    j["pt"] = e.pt;
    j["dep"] = e.dep;
    j["path"] = to_string(e.path);
    out << j.dump() << '\n';
  }
}

std::string trace_to_jsonl(const ExecTrace& trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return os.str();
}

ExecTrace read_trace(std::istream& in) {
  ExecTrace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TraceEntry e;
      e.core = j.at("core").get<CoreId>();
      e.seq = j.at("seq").get<std::uint64_t>();
      e.pc = j.value("pc", std::size_t{0});
      e.kind = enum_from<OpClass, 5>(j.at("kind").get<std::string>(), "op kind");
      e.addr = j.at("addr").get<Addr>();
      e.value.writer = j.at("writer").get<CoreId>();
      e.value.seq = j.at("wseq").get<std::uint64_t>();
      e.value.data = j.at("data").get<std::int64_t>();
      e.ts = Timestamp{j.at("ts").get<std::uint64_t>()};
      e.pt = j.at("pt").get<std::uint64_t>();
      e.dep = j.value("dep", std::int64_t{-1});
      e.path = enum_from<AccessPath, 9>(j.value("path", std::string("none")), "access path");
      trace.push_back(e);
    } catch (const TraceError& e) {
      throw TraceError("trace line " + std::to_string(lineno) + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw TraceError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return trace;
}

}  // namespace tsim
