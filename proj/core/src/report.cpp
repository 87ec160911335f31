#include "fbtn/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fbtn {

const char* const kTraceHeader =
    "k,fbe,res_norm,tau,cg_iters,cg_status,delta,eps_inner,gamma,"
    "hessvec_total,prox_total,wall_ms";

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* cg_status_token(const std::optional<CgStatus>& s) {
  if (!s.has_value()) return "none";
  switch (*s) {
    case CgStatus::Converged: return "converged";
    case CgStatus::MaxIterations: return "max_iters";
    case CgStatus::NegativeCurvature: return "neg_curv";
  }
  return "none";
}

std::optional<CgStatus> cg_status_from_token(const std::string& t) {
  if (t == "none") return std::nullopt;
  if (t == "converged") return CgStatus::Converged;
  if (t == "max_iters") return CgStatus::MaxIterations;
  if (t == "neg_curv") return CgStatus::NegativeCurvature;
  throw std::runtime_error("trace: unknown cg_status token '" + t + "'");
}

}  // namespace

std::string trace_to_csv(const std::vector<IterationRecord>& trace) {
  std::ostringstream os;
  os << kTraceHeader << "\n";
  for (const auto& r : trace) {
    os << r.k << ',' << fmt(r.fbe) << ',' << fmt(r.res_norm) << ','
       << fmt(r.tau) << ',' << r.cg_iters << ',' << cg_status_token(r.cg_status)
       << ',' << fmt(r.delta) << ',' << fmt(r.eps_inner) << ','
       << fmt(r.gamma) << ',' << r.hessvec_total << ',' << r.prox_total << ','
       << fmt(r.wall_ms) << "\n";
  }
  return os.str();
}

std::vector<IterationRecord> parse_trace_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("trace: empty file");
  if (line == std::string(kTraceHeader) + "\r") line.pop_back();
  if (line != kTraceHeader)
    throw std::runtime_error("trace: unexpected header '" + line + "'");
  std::vector<IterationRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 12)
      throw std::runtime_error("trace: malformed row '" + line + "'");
    IterationRecord r;
    r.k = std::stoi(cells[0]);
    r.fbe = std::stod(cells[1]);
    r.res_norm = std::stod(cells[2]);
    r.tau = std::stod(cells[3]);
    r.cg_iters = std::stoi(cells[4]);
    r.cg_status = cg_status_from_token(cells[5]);
    r.delta = std::stod(cells[6]);
    r.eps_inner = std::stod(cells[7]);
    r.gamma = std::stod(cells[8]);
    r.hessvec_total = std::stol(cells[9]);
    r.prox_total = std::stol(cells[10]);
    r.wall_ms = std::stod(cells[11]);
    out.push_back(r);
  }
  return out;
}

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::ResidualBelowTol: return "ResidualBelowTol";
    case SolveStatus::MaxOuterIterations: return "MaxOuterIterations";
  }
  return "?";
}

std::string format_run_section(const std::string& name, const Solution& sol,
                               const OracleCounters& counters) {
  std::ostringstream os;
  os << "solver " << name << ":\n"
     << "  status:           " << status_name(sol.status) << "\n"
     << "  outer iterations: " << sol.trace.size() << "\n"
     << "  final res_norm:   " << fmt(sol.final_point.residual.norm()) << "\n"
     << "  final fbe:        " << fmt(sol.final_point.fbe) << "\n"
     << "  prox calls:       " << counters.prox << "\n"
     << "  hess_vec calls:   " << counters.hess_vec << "\n"
     << "  wall ms:          " << fmt(sol.wall_ms_total) << "\n";
  return os.str();
}

std::string format_ratio_table(const std::string& name, const Solution& sol) {
  // successive residual norms, including the final point that stopped the run
  std::vector<double> res;
  for (const auto& r : sol.trace) res.push_back(r.res_norm);
  res.push_back(sol.final_point.residual.norm());

  std::ostringstream os;
  os << "residual ratios (" << name << ", trailing iterations):\n";
  os << "  k    |R_k+1|/|R_k|          |R_k+1|/|R_k|^2\n";
  size_t count = res.size() >= 2 ? res.size() - 1 : 0;
  size_t start = count > 5 ? count - 5 : 0;
  for (size_t i = start; i < count; ++i) {
    double r1 = res[i] > 0.0 ? res[i + 1] / res[i] : 0.0;
    double r2 = res[i] > 0.0 ? res[i + 1] / (res[i] * res[i]) : 0.0;
    os << "  " << i << "    " << fmt(r1) << "    " << fmt(r2) << "\n";
  }
  if (count == 0) os << "  (no iterations)\n";
  return os.str();
}

std::string format_comparison(const Solution& newton,
                              const Solution& splitting) {
  std::ostringstream os;
  os << "comparison:\n"
     << "  outer iterations: fbtn " << newton.trace.size() << " vs fbs "
     << splitting.trace.size() << "\n"
     << "  final res_norm:   fbtn " << fmt(newton.final_point.residual.norm())
     << " vs fbs " << fmt(splitting.final_point.residual.norm()) << "\n";
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fbtn
