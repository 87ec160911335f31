#pragma once

#include <string>
#include <vector>

#include "fbtn/fbe.hpp"
#include "fbtn/solver.hpp"

namespace fbtn {

// Fixed trace schema shared by both solvers.  Floating-point fields are
// written with 17 significant digits so a parse-and-rewrite round trip is
// lossless and two identical runs produce byte-identical files apart from
// the wall_ms column.
extern const char* const kTraceHeader;

std::string trace_to_csv(const std::vector<IterationRecord>& trace);
std::vector<IterationRecord> parse_trace_csv(const std::string& text);

std::string format_run_section(const std::string& name, const Solution& sol,
                               const OracleCounters& counters);

// Residual ratios over the trailing iterations, the quantity whose decay
// separates a Newton-type tail from a first-order one.
std::string format_ratio_table(const std::string& name, const Solution& sol);

std::string format_comparison(const Solution& newton, const Solution& splitting);

std::string status_name(SolveStatus s);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace fbtn
