#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fbtn/config.hpp"
#include "fbtn/prox.hpp"
#include "fbtn/report.hpp"
#include "fbtn/smooth.hpp"

using fbtn::Vector;
namespace fs = std::filesystem;

namespace {

// ------------------------------------------------------------------ config

const char* kInlineLasso = R"({
  "problem": {
    "kind": "lasso",
    "A": [[1.0, 0.0, 2.0], [0.0, 1.0, -1.0]],
    "b": [1.0, 2.0],
    "lambda": 0.5
  },
  "x0": [0.0, 0.0, 0.0],
  "solver": {"eps": 1e-9, "max_outer": 40}
})";

std::string generated_lasso(const std::string& extra_problem = "",
                            const std::string& extra_solver = "") {
  std::ostringstream os;
  os << R"({"problem": {"kind": "lasso", "m": 8, "n": 12, "seed": 3)"
     << extra_problem << R"(}, "solver": {"eps": 1e-9)" << extra_solver
     << "}}";
  return os.str();
}

// ---------------------------------------------------------------- processes

std::string bench() { return FBTN_BENCH_PATH; }

struct CmdResult {
  int code = -1;
  std::string out;
  std::string err;
};

CmdResult run_bench(const std::string& args, const fs::path& dir) {
  fs::path out_file = dir / "stdout.txt";
  fs::path err_file = dir / "stderr.txt";
  std::string cmd = "FBTN_LOG=quiet " + bench() + " " + args + " > " +
                    out_file.string() + " 2> " + err_file.string();
  int raw = std::system(cmd.c_str());
  CmdResult r;
  r.code = (raw == -1) ? -1 : WEXITSTATUS(raw);
  r.out = fbtn::read_text_file(out_file.string());
  r.err = fbtn::read_text_file(err_file.string());
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fbtn_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path file(const std::string& name, const std::string& content) const {
    fs::path p = path / name;
    fbtn::write_text_file(p.string(), content);
    return p;
  }
};

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

// trace rows with the wall-clock column removed, for determinism comparisons
std::vector<std::string> strip_wall_ms(const std::string& csv) {
  std::vector<std::string> out;
  for (auto& line : lines_of(csv)) {
    auto pos = line.rfind(',');
    out.push_back(pos == std::string::npos ? line : line.substr(0, pos));
  }
  return out;
}

}  // namespace

// ===================================================================== config

TEST_CASE("inline lasso config builds the described instance") {
  auto bundle = fbtn::load_config_text(kInlineLasso);
  CHECK(bundle.kind == "lasso");
  CHECK(bundle.m == 2);
  CHECK(bundle.n == 3);
  CHECK(bundle.smooth->dim() == 3);
  CHECK(bundle.nonsmooth->dim() == 3);
  CHECK(bundle.x0.size() == 3);
  CHECK(bundle.x0.norm() == 0.0);
  CHECK(bundle.options.eps == 1e-9);
  CHECK(bundle.options.max_outer == 40);
  CHECK(bundle.summary.find("lasso m=2 n=3") != std::string::npos);

  auto* l1 = dynamic_cast<const fbtn::L1Norm*>(bundle.nonsmooth.get());
  REQUIRE(l1 != nullptr);
  CHECK(l1->weight() == 0.5);

  // least squares on the given data: f(0) = ||b||^2 / 2
  CHECK(bundle.smooth->value(Vector::Zero(3)) == doctest::Approx(2.5));
}

TEST_CASE("relative weight defaults to a tenth of the gradient peak") {
  auto bundle = fbtn::load_config_text(R"({
    "problem": {"kind": "lasso",
                "A": [[1.0, 0.0], [0.0, 1.0]],
                "b": [3.0, 1.0]}
  })");
  auto* l1 = dynamic_cast<const fbtn::L1Norm*>(bundle.nonsmooth.get());
  REQUIRE(l1 != nullptr);
  // |A^T b|_inf = 3
  CHECK(l1->weight() == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("generated instances are reproducible from the seed") {
  auto a = fbtn::load_config_text(generated_lasso());
  auto b = fbtn::load_config_text(generated_lasso());
  Vector probe = Vector::LinSpaced(12, -1.0, 2.0);
  CHECK(a.smooth->value(probe) == b.smooth->value(probe));
  CHECK(a.smooth->gradient(probe) == b.smooth->gradient(probe));

  auto c = fbtn::load_config_text(
      R"({"problem": {"kind": "lasso", "m": 8, "n": 12, "seed": 4}})");
  CHECK(a.smooth->value(probe) != c.smooth->value(probe));
}

TEST_CASE("every problem kind instantiates") {
  auto box = fbtn::load_config_text(R"({
    "problem": {"kind": "box_qp", "n": 5, "seed": 2,
                "lower": -1.0, "upper": [1, 2, 3, 4, 5]}
  })");
  CHECK(dynamic_cast<const fbtn::SeparableBox*>(box.nonsmooth.get()));
  CHECK(dynamic_cast<const fbtn::QuadraticSmooth*>(box.smooth.get()));

  auto grp = fbtn::load_config_text(R"({
    "problem": {"kind": "group_lasso", "m": 6, "n": 9, "seed": 2,
                "group_size": 3, "lambda": 0.2}
  })");
  auto* groups = dynamic_cast<const fbtn::GroupNorms*>(grp.nonsmooth.get());
  REQUIRE(groups != nullptr);
  CHECK(groups->groups().size() == 3);

  auto logi = fbtn::load_config_text(R"({
    "problem": {"kind": "logistic_l1", "m": 10, "n": 6, "seed": 2}
  })");
  CHECK(dynamic_cast<const fbtn::LogisticSmooth*>(logi.smooth.get()));

  auto custom = fbtn::load_config_text(R"({
    "problem": {"kind": "custom_quadratic_prox", "n": 4, "seed": 2,
                "prox": {"type": "simplex"}}
  })");
  CHECK(dynamic_cast<const fbtn::UnitSimplex*>(custom.nonsmooth.get()));

  auto half = fbtn::load_config_text(R"({
    "problem": {"kind": "custom_quadratic_prox", "n": 2, "seed": 2,
                "prox": {"type": "halfspace", "a": [1.0, -1.0], "beta": 0.5}}
  })");
  CHECK(dynamic_cast<const fbtn::Halfspace*>(half.nonsmooth.get()));
}

TEST_CASE("explicit groups use one-based indices") {
  auto grp = fbtn::load_config_text(R"({
    "problem": {"kind": "group_lasso", "m": 4, "n": 4, "seed": 1,
                "groups": [[1, 3], [2, 4]], "lambda": 0.1}
  })");
  auto* groups = dynamic_cast<const fbtn::GroupNorms*>(grp.nonsmooth.get());
  REQUIRE(groups != nullptr);
  REQUIRE(groups->groups().size() == 2);
  CHECK(groups->groups()[0] == std::vector<fbtn::Index>{0, 2});
  CHECK(groups->groups()[1] == std::vector<fbtn::Index>{1, 3});
}

TEST_CASE("config defects raise errors naming the offending key") {
  auto message_of = [](const std::string& text) {
    try {
      fbtn::load_config_text(text);
    } catch (const fbtn::ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("(no error)");
  };

  CHECK(message_of(R"({"problem": {"kind": "lasso", "n": 4, "lambda": -1}})") ==
        "config: 'problem.lambda' must be nonnegative");
  CHECK(message_of(R"({"problem": {"kind": "lasso", "n": 4,
                       "frobnicate": 1}})") ==
        "config: unknown key 'problem.frobnicate'");
  CHECK(message_of(R"({"problem": {"kind": "teleport", "n": 4}})") ==
        "config: unknown 'problem.kind' value 'teleport'");
  CHECK(message_of("{}") == "config: missing 'problem' section");
  CHECK(message_of("[1,2]") == "config: top level must be an object");
  CHECK(message_of("not json at all").find("not valid JSON") !=
        std::string::npos);
  CHECK(message_of(R"({"problem": {"kind": "lasso", "n": 4}, "x0": [1, 2]})") ==
        "config: 'x0' must have length n");
  CHECK(message_of(R"({"problem": {"kind": "lasso", "n": 4},
                       "solver": {"gamma": -0.5}})") ==
        "config: 'solver.gamma' must be positive");
  CHECK(message_of(R"({"problem": {"kind": "lasso", "n": 4},
                       "solver": {"warp": 9}})") ==
        "config: unknown key 'solver.warp'");
  CHECK(message_of(R"({"problem": {"kind": "lasso",
                       "A": [[1, 2]], "b": [1, 1]}})") ==
        "config: 'problem.A' and 'problem.b' dimensions disagree");
  CHECK(message_of(R"({"problem": {"kind": "lasso", "n": 4, "seed": -3}})") ==
        "config: 'problem.seed' must be a nonnegative integer");
}

// ======================================================================== cli

TEST_CASE("solve writes a parseable trace and a report") {
  TempDir dir;
  fs::path cfg = dir.file("config.json", generated_lasso());
  fs::path out = dir.path / "out";
  CmdResult r = run_bench("solve --config " + cfg.string() + " --out " +
                              out.string(), dir.path);
  CHECK(r.code == 0);

  std::string csv = fbtn::read_text_file((out / "trace.csv").string());
  auto trace = fbtn::parse_trace_csv(csv);  // throws on schema drift
  CHECK(!trace.empty());
  CHECK(lines_of(csv)[0] == fbtn::kTraceHeader);

  std::string report = fbtn::read_text_file((out / "report.txt").string());
  CHECK(report.find("instance: lasso m=8 n=12 seed=3") != std::string::npos);
  CHECK(report.find("solver fbtn:\n") != std::string::npos);
  CHECK(report.find("  status:           ResidualBelowTol") !=
        std::string::npos);
  CHECK(report.find("residual ratios (fbtn, trailing iterations):") !=
        std::string::npos);
}

TEST_CASE("repeat runs differ only in the wall-clock column") {
  TempDir dir;
  fs::path cfg = dir.file("config.json", generated_lasso());
  fs::path out1 = dir.path / "one";
  fs::path out2 = dir.path / "two";
  REQUIRE(run_bench("solve --config " + cfg.string() + " --out " +
                        out1.string(), dir.path).code == 0);
  REQUIRE(run_bench("solve --config " + cfg.string() + " --out " +
                        out2.string(), dir.path).code == 0);

  auto a = strip_wall_ms(fbtn::read_text_file((out1 / "trace.csv").string()));
  auto b = strip_wall_ms(fbtn::read_text_file((out2 / "trace.csv").string()));
  CHECK(a.size() > 1);
  CHECK(a == b);
}

TEST_CASE("a seed override regenerates the instance") {
  TempDir dir;
  fs::path cfg = dir.file("config.json", generated_lasso());
  fs::path out1 = dir.path / "one";
  fs::path out2 = dir.path / "two";
  REQUIRE(run_bench("solve --config " + cfg.string() + " --seed 11 --out " +
                        out1.string(), dir.path).code == 0);
  REQUIRE(run_bench("solve --config " + cfg.string() + " --seed 12 --out " +
                        out2.string(), dir.path).code == 0);
  std::string r1 = fbtn::read_text_file((out1 / "report.txt").string());
  std::string r2 = fbtn::read_text_file((out2 / "report.txt").string());
  CHECK(r1.find("seed=11") != std::string::npos);
  CHECK(r2.find("seed=12") != std::string::npos);
  auto a = strip_wall_ms(fbtn::read_text_file((out1 / "trace.csv").string()));
  auto b = strip_wall_ms(fbtn::read_text_file((out2 / "trace.csv").string()));
  CHECK(a != b);
}

TEST_CASE("both solvers produce two traces and a comparison") {
  TempDir dir;
  fs::path cfg = dir.file("config.json", generated_lasso());
  fs::path out = dir.path / "out";
  CmdResult r = run_bench("solve --config " + cfg.string() +
                              " --solver both --out " + out.string(),
                          dir.path);
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "trace.csv"));
  CHECK(fs::exists(out / "trace_fbs.csv"));

  std::string report = fbtn::read_text_file((out / "report.txt").string());
  CHECK(report.find("solver fbtn:\n") != std::string::npos);
  CHECK(report.find("solver fbs:\n") != std::string::npos);
  CHECK(report.find("residual ratios (fbs, trailing iterations):") !=
        std::string::npos);
  CHECK(report.find("comparison:\n") != std::string::npos);
  CHECK(report.find("  outer iterations: fbtn ") != std::string::npos);

  // the compare subcommand is shorthand for the same thing
  fs::path out2 = dir.path / "cmp";
  CmdResult rc = run_bench("compare --config " + cfg.string() + " --out " +
                               out2.string(), dir.path);
  CHECK(rc.code == 0);
  CHECK(fs::exists(out2 / "trace_fbs.csv"));
}

TEST_CASE("config defects exit with code 1 and a named key") {
  TempDir dir;
  fs::path bad = dir.file("bad.json",
                          R"({"problem": {"kind": "lasso", "n": 4,
                              "lambda": -2}})");
  CmdResult r = run_bench("solve --config " + bad.string() + " --out " +
                              (dir.path / "o").string(), dir.path);
  CHECK(r.code == 1);
  CHECK(r.err.find("problem.lambda") != std::string::npos);

  fs::path unknown = dir.file("unknown.json",
                              R"({"problem": {"kind": "lasso", "n": 4,
                                  "frobnicate": true}})");
  r = run_bench("solve --config " + unknown.string() + " --out " +
                    (dir.path / "o").string(), dir.path);
  CHECK(r.code == 1);
  CHECK(r.err.find("frobnicate") != std::string::npos);

  r = run_bench("solve --config " + (dir.path / "missing.json").string() +
                    " --out " + (dir.path / "o").string(), dir.path);
  CHECK(r.code == 1);

  // an invalid override value is rejected before any run starts
  fs::path ok = dir.file("ok.json", generated_lasso());
  r = run_bench("solve --config " + ok.string() + " --sigma-frac 1.5 --out " +
                    (dir.path / "o").string(), dir.path);
  CHECK(r.code == 1);
  CHECK(r.err.find("sigma_frac") != std::string::npos);
}

TEST_CASE("an iteration cap that bites exits with code 2") {
  TempDir dir;
  fs::path cfg = dir.file("config.json", generated_lasso());
  fs::path out = dir.path / "out";
  CmdResult r = run_bench("solve --config " + cfg.string() +
                              " --eps 1e-13 --max-outer 1 --out " +
                              out.string(), dir.path);
  CHECK(r.code == 2);
  // the truncated trace is still written for post-mortems
  auto trace = fbtn::parse_trace_csv(
      fbtn::read_text_file((out / "trace.csv").string()));
  CHECK(trace.size() == 1);
}

TEST_CASE("check subcommand reports a clean suite") {
  TempDir dir;
  CmdResult r = run_bench("check --seed 1", dir.path);
  CHECK(r.code == 0);
  CHECK(r.out.find(" 0 failure(s), seed 1") != std::string::npos);
  CHECK(r.out.find("[PASS] ") != std::string::npos);
  CHECK(r.out.find("[FAIL]") == std::string::npos);
}

TEST_CASE("missing required flags are a usage error") {
  TempDir dir;
  CmdResult r = run_bench("solve", dir.path);
  CHECK(r.code != 0);
}
