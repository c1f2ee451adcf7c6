#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tsim/engine.hpp"

namespace tsim {

/// Pretty-printed JSON with a fixed key order, so equal reports are
/// byte-identical.
std::string metrics_json(const MetricsReport& m);

/// One header plus one row per report; per-class traffic gets its own
/// flits and flit_hops columns.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& m);
std::string metrics_csv(const std::vector<MetricsReport>& reports);

/// JSON lines, one committed op per line.
std::string trace_to_jsonl(const ExecTrace& trace);
void write_trace(std::ostream& out, const ExecTrace& trace);
/// Throws TraceError on malformed input.
ExecTrace read_trace(std::istream& in);

}  // namespace tsim
