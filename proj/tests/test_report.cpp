#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "fbtn/oracles.hpp"
#include "fbtn/prox.hpp"
#include "fbtn/report.hpp"
#include "fbtn/smooth.hpp"
#include "fbtn/solver.hpp"

using fbtn::IterationRecord;
using fbtn::Matrix;
using fbtn::Rng;
using fbtn::Solution;
using fbtn::Vector;

namespace {

size_t count_lines(const std::string& s) {
  size_t n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("trace header names the twelve columns in order") {
  CHECK(std::string(fbtn::kTraceHeader) ==
        "k,fbe,res_norm,tau,cg_iters,cg_status,delta,eps_inner,gamma,"
        "hessvec_total,prox_total,wall_ms");
}

TEST_CASE("hand-built records survive a csv round trip exactly") {
  std::vector<IterationRecord> trace(3);
  trace[0].k = 0;
  trace[0].fbe = -1.2345678901234567e-3;
  trace[0].res_norm = 0.1;
  trace[0].tau = 1.0;
  trace[0].cg_iters = 4;
  trace[0].cg_status = fbtn::CgStatus::Converged;
  trace[0].delta = 1e-300;
  trace[0].eps_inner = 2.5e-9;
  trace[0].gamma = 0.2375;
  trace[0].hessvec_total = 1234567890123L;
  trace[0].prox_total = 17;
  trace[0].wall_ms = 123.456;
  trace[1].k = 1;
  trace[1].cg_status = fbtn::CgStatus::NegativeCurvature;
  trace[1].tau = 0.0;
  trace[2].k = 42;
  trace[2].cg_status.reset();  // serialized as the token "none"
  trace[2].fbe = 1.2345678901234567e+100;

  std::string csv = fbtn::trace_to_csv(trace);
  auto back = fbtn::parse_trace_csv(csv);
  REQUIRE(back.size() == trace.size());
  for (size_t i = 0; i < trace.size(); ++i) {
    CHECK(back[i].k == trace[i].k);
    CHECK(back[i].fbe == trace[i].fbe);
    CHECK(back[i].res_norm == trace[i].res_norm);
    CHECK(back[i].tau == trace[i].tau);
    CHECK(back[i].cg_iters == trace[i].cg_iters);
    CHECK(back[i].cg_status.has_value() == trace[i].cg_status.has_value());
    if (back[i].cg_status.has_value())
      CHECK(*back[i].cg_status == *trace[i].cg_status);
    CHECK(back[i].delta == trace[i].delta);
    CHECK(back[i].eps_inner == trace[i].eps_inner);
    CHECK(back[i].gamma == trace[i].gamma);
    CHECK(back[i].hessvec_total == trace[i].hessvec_total);
    CHECK(back[i].prox_total == trace[i].prox_total);
    CHECK(back[i].wall_ms == trace[i].wall_ms);
  }
}

TEST_CASE("a real solver trace round-trips without loss") {
  Rng rng(53);
  Matrix A = rng.gaussian_matrix(6, 10);
  Vector b = rng.gaussian_vector(6);
  auto f = std::make_shared<fbtn::LeastSquaresSmooth>(A, b);
  auto g = std::make_shared<fbtn::L1Norm>(10, 0.3);
  fbtn::FbeProblem problem(f, g);
  fbtn::SolverOptions opts;
  opts.eps = 1e-9;
  Solution sol = fbtn_solve(problem, Vector(rng.gaussian_vector(10)), opts);
  REQUIRE(!sol.trace.empty());

  auto back = fbtn::parse_trace_csv(fbtn::trace_to_csv(sol.trace));
  REQUIRE(back.size() == sol.trace.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].fbe == sol.trace[i].fbe);
    CHECK(back[i].res_norm == sol.trace[i].res_norm);
    CHECK(back[i].gamma == sol.trace[i].gamma);
    CHECK(back[i].eps_inner == sol.trace[i].eps_inner);
    CHECK(back[i].wall_ms == sol.trace[i].wall_ms);
  }
}

TEST_CASE("trace parser rejects malformed input") {
  CHECK_THROWS_AS(fbtn::parse_trace_csv(""), std::runtime_error);
  CHECK_THROWS_AS(fbtn::parse_trace_csv("k,fbe\n1,2\n"), std::runtime_error);

  std::string head(fbtn::kTraceHeader);
  CHECK_THROWS_AS(fbtn::parse_trace_csv(head + "\n1,2,3\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(
      fbtn::parse_trace_csv(
          head + "\n0,1,1,1,0,bogus,0,0,0.5,0,0,0\n"),
      std::runtime_error);
}

TEST_CASE("trace parser tolerates crlf headers and blank lines") {
  std::string head(fbtn::kTraceHeader);
  std::string body = "0,1,0.5,1,2,converged,0.1,0.01,0.25,3,4,1.5\n";
  auto recs = fbtn::parse_trace_csv(head + "\r\n" + body + "\n" + body);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].res_norm == 0.5);
  CHECK(recs[0].cg_iters == 2);
  REQUIRE(recs[0].cg_status.has_value());
  CHECK(*recs[0].cg_status == fbtn::CgStatus::Converged);
}

TEST_CASE("status names") {
  CHECK(fbtn::status_name(fbtn::SolveStatus::ResidualBelowTol) ==
        "ResidualBelowTol");
  CHECK(fbtn::status_name(fbtn::SolveStatus::MaxOuterIterations) ==
        "MaxOuterIterations");
}

TEST_CASE("run section prints the fixed field layout") {
  Solution sol;
  sol.status = fbtn::SolveStatus::ResidualBelowTol;
  sol.trace.resize(3);
  sol.final_point.residual = Vector::Zero(2);
  sol.final_point.fbe = 0.25;
  sol.wall_ms_total = 1.5;
  fbtn::OracleCounters counters;
  counters.prox = 7;
  counters.hess_vec = 9;

  CHECK(fbtn::format_run_section("fbtn", sol, counters) ==
        "solver fbtn:\n"
        "  status:           ResidualBelowTol\n"
        "  outer iterations: 3\n"
        "  final res_norm:   0\n"
        "  final fbe:        0.25\n"
        "  prox calls:       7\n"
        "  hess_vec calls:   9\n"
        "  wall ms:          1.5\n");
}

TEST_CASE("ratio table reports both first- and second-order ratios") {
  Solution sol;
  sol.trace.resize(2);
  sol.trace[0].res_norm = 1.0;
  sol.trace[1].res_norm = 0.5;
  sol.final_point.residual = Vector::Zero(2);
  sol.final_point.residual[0] = 0.25;

  std::string table = fbtn::format_ratio_table("fbtn", sol);
  CHECK(table.find("residual ratios (fbtn, trailing iterations):\n") !=
        std::string::npos);
  CHECK(table.find("  k    |R_k+1|/|R_k|          |R_k+1|/|R_k|^2\n") !=
        std::string::npos);
  // 0.5/1.0 and 0.5/1.0^2, then 0.25/0.5 and 0.25/0.5^2
  CHECK(table.find("  0    0.5    0.5\n") != std::string::npos);
  CHECK(table.find("  1    0.5    1\n") != std::string::npos);
  CHECK(count_lines(table) == 4);
}

TEST_CASE("ratio table keeps only the trailing five ratios") {
  Solution sol;
  sol.trace.resize(8);
  for (int i = 0; i < 8; ++i)
    sol.trace[i].res_norm = 256.0 / (1 << i);
  sol.final_point.residual = Vector::Zero(2);
  sol.final_point.residual[0] = 1.0;

  std::string table = fbtn::format_ratio_table("x", sol);
  CHECK(count_lines(table) == 2 + 5);
  CHECK(table.find("  2    ") == std::string::npos);
  CHECK(table.find("  3    0.5    ") != std::string::npos);
  CHECK(table.find("  7    0.5    ") != std::string::npos);
}

TEST_CASE("ratio table handles empty traces and exact zeros") {
  Solution sol;
  sol.final_point.residual = Vector::Zero(2);
  CHECK(fbtn::format_ratio_table("x", sol).find("(no iterations)") !=
        std::string::npos);

  sol.trace.resize(1);
  sol.trace[0].res_norm = 0.0;
  CHECK(fbtn::format_ratio_table("x", sol).find("  0    0    0\n") !=
        std::string::npos);
}

TEST_CASE("comparison section pairs the two iteration counts") {
  Solution newton;
  newton.trace.resize(4);
  newton.final_point.residual = Vector::Zero(2);
  newton.final_point.residual << 0.3, 0.4;
  Solution splitting;
  splitting.trace.resize(10);
  splitting.final_point.residual = Vector::Zero(2);
  splitting.final_point.residual[1] = 0.25;

  CHECK(fbtn::format_comparison(newton, splitting) ==
        "comparison:\n"
        "  outer iterations: fbtn 4 vs fbs 10\n"
        "  final res_norm:   fbtn 0.5 vs fbs 0.25\n");
}

TEST_CASE("text files round trip and report i/o failures") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "fbtn_report_roundtrip.txt";
  std::string content = "line one\nline two\n\ttabbed\x01 binary-ish\n";
  fbtn::write_text_file(path.string(), content);
  CHECK(fbtn::read_text_file(path.string()) == content);
  std::remove(path.string().c_str());

  CHECK_THROWS_AS(fbtn::read_text_file(path.string()), std::runtime_error);
  CHECK_THROWS_AS(
      fbtn::write_text_file("/nonexistent-dir-xyz/out.txt", "x"),
      std::runtime_error);
}
