#include "fbtn/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fbtn/rng.hpp"

namespace fbtn {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& obj, const std::string& section,
                const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      fail("config: unknown key '" + section + "." + it.key() + "'");
}

double get_number(const json& obj, const std::string& section,
                  const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_number()) fail("config: '" + section + "." + key + "' must be a number");
  return v.get<double>();
}

Index get_positive_index(const json& obj, const std::string& section,
                         const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() <= 0)
    fail("config: '" + section + "." + key + "' must be a positive integer");
  return static_cast<Index>(v.get<long long>());
}

Vector parse_vector(const json& v, const std::string& where) {
  if (!v.is_array()) fail("config: '" + where + "' must be an array of numbers");
  Vector out(static_cast<Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      fail("config: '" + where + "' must contain only numbers");
    out[static_cast<Index>(i)] = v[i].get<double>();
  }
  return out;
}

Matrix parse_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty())
    fail("config: '" + where + "' must be a nonempty array of rows");
  size_t cols = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array()) fail("config: '" + where + "' rows must be arrays");
    if (i == 0)
      cols = v[i].size();
    else if (v[i].size() != cols)
      fail("config: '" + where + "' rows have unequal lengths");
  }
  if (cols == 0) fail("config: '" + where + "' rows are empty");
  Matrix out(static_cast<Index>(v.size()), static_cast<Index>(cols));
  for (size_t i = 0; i < v.size(); ++i)
    for (size_t j = 0; j < cols; ++j) {
      if (!v[i][j].is_number())
        fail("config: '" + where + "' must contain only numbers");
      out(static_cast<Index>(i), static_cast<Index>(j)) = v[i][j].get<double>();
    }
  return out;
}

// bounds may be a scalar (broadcast) or a length-n array
Vector parse_bound(const json& v, Index n, double fallback,
                   const std::string& where) {
  if (v.is_null()) return Vector::Constant(n, fallback);
  if (v.is_number()) return Vector::Constant(n, v.get<double>());
  Vector out = parse_vector(v, where);
  if (out.size() != n)
    fail("config: '" + where + "' must have length n");
  return out;
}

std::vector<std::vector<Index>> parse_groups(const json& v, Index n) {
  std::vector<std::vector<Index>> out;
  if (!v.is_array() || v.empty())
    fail("config: 'problem.groups' must be a nonempty array of index arrays");
  for (const auto& g : v) {
    if (!g.is_array() || g.empty())
      fail("config: 'problem.groups' entries must be nonempty index arrays");
    std::vector<Index> idx;
    for (const auto& e : g) {
      if (!e.is_number_integer())
        fail("config: 'problem.groups' indices must be integers");
      long long one_based = e.get<long long>();
      if (one_based < 1 || one_based > n)
        fail("config: 'problem.groups' index out of range (1-based)");
      idx.push_back(static_cast<Index>(one_based - 1));
    }
    out.push_back(std::move(idx));
  }
  return out;
}

std::vector<std::vector<Index>> contiguous_groups(Index n, Index size) {
  std::vector<std::vector<Index>> out;
  for (Index start = 0; start < n; start += size) {
    std::vector<Index> g;
    for (Index i = start; i < std::min(n, start + size); ++i) g.push_back(i);
    out.push_back(std::move(g));
  }
  return out;
}

double resolve_weight(const json& prob, double scale_for_rel) {
  if (prob.contains("lambda")) {
    double lam = get_number(prob, "problem", "lambda");
    if (lam < 0.0) fail("config: 'problem.lambda' must be nonnegative");
    return lam;
  }
  double rel = 0.1;
  if (prob.contains("lambda_rel")) {
    rel = get_number(prob, "problem", "lambda_rel");
    if (rel < 0.0) fail("config: 'problem.lambda_rel' must be nonnegative");
  }
  return rel * scale_for_rel;
}

struct GaussianData {
  Matrix A;
  Vector b;  // regression targets, or +-1 labels for logistic
};

// Planted regression instance: A has N(0,1)/sqrt(m) entries, the signal is
// sparse with +-1 entries on roughly a tenth of the coordinates, and b
// carries 0.1-scaled Gaussian noise.
GaussianData generate_regression(Rng& rng, Index m, Index n) {
  GaussianData d;
  d.A = rng.gaussian_matrix(m, n) / std::sqrt(static_cast<double>(m));
  Vector xt = Vector::Zero(n);
  for (Index i = 0; i < n; ++i)
    if (rng.uniform() < 0.1) xt[i] = rng.uniform() < 0.5 ? 1.0 : -1.0;
  d.b = d.A * xt + 0.1 * rng.gaussian_vector(m);
  return d;
}

GaussianData generate_classification(Rng& rng, Index m, Index n) {
  GaussianData d;
  d.A = rng.gaussian_matrix(m, n) / std::sqrt(static_cast<double>(m));
  Vector xt = Vector::Zero(n);
  for (Index i = 0; i < n; ++i)
    if (rng.uniform() < 0.1) xt[i] = rng.uniform() < 0.5 ? 3.0 : -3.0;
  Vector margin = d.A * xt + 0.3 * rng.gaussian_vector(m);
  d.b = Vector(m);
  for (Index i = 0; i < m; ++i) d.b[i] = margin[i] >= 0.0 ? 1.0 : -1.0;
  return d;
}

Matrix generate_spd(Rng& rng, Index m, Index n) {
  Matrix G = rng.gaussian_matrix(m, n);
  Matrix H = (G.transpose() * G) / static_cast<double>(m);
  for (Index i = 0; i < n; ++i) H(i, i) += 1.0;
  return H;
}

std::shared_ptr<const ProxOracle> build_prox(const json& spec, Index n) {
  if (!spec.is_object() || !spec.contains("type"))
    fail("config: 'problem.prox' must be an object with a 'type'");
  std::string type = spec.at("type").get<std::string>();
  auto num = [&](const char* key, double dflt) {
    if (!spec.contains(key)) return dflt;
    return get_number(spec, "problem.prox", key);
  };
  if (type == "l1") return std::make_shared<L1Norm>(n, num("weight", 1.0));
  if (type == "l2") return std::make_shared<EuclideanNorm>(n, num("weight", 1.0));
  if (type == "linf") return std::make_shared<LInfNorm>(n, num("weight", 1.0));
  if (type == "box") {
    Vector lo = parse_bound(spec.contains("lower") ? spec.at("lower") : json(),
                            n, 0.0, "problem.prox.lower");
    Vector hi = parse_bound(spec.contains("upper") ? spec.at("upper") : json(),
                            n, 1.0, "problem.prox.upper");
    return std::make_shared<SeparableBox>(lo, hi);
  }
  if (type == "ball") return std::make_shared<EuclideanBall>(n);
  if (type == "simplex") return std::make_shared<UnitSimplex>(n);
  if (type == "soc") return std::make_shared<SecondOrderCone>(n);
  if (type == "l1ball") return std::make_shared<L1Ball>(n, num("radius", 1.0));
  if (type == "zero") return std::make_shared<ZeroProx>(n);
  if (type == "halfspace") {
    if (!spec.contains("a")) fail("config: 'problem.prox.a' is required");
    Vector a = parse_vector(spec.at("a"), "problem.prox.a");
    if (a.size() != n) fail("config: 'problem.prox.a' must have length n");
    return std::make_shared<Halfspace>(a, num("beta", 0.0));
  }
  if (type == "groups") {
    std::vector<std::vector<Index>> groups;
    if (spec.contains("groups"))
      groups = parse_groups(spec.at("groups"), n);
    else
      groups = contiguous_groups(
          n, spec.contains("group_size")
                 ? get_positive_index(spec, "problem.prox", "group_size")
                 : 5);
    return std::make_shared<GroupNorms>(n, groups, num("weight", 1.0));
  }
  fail("config: unknown 'problem.prox.type' value '" + type + "'");
}

void apply_solver_overrides(const json& s, ProblemBundle& bundle) {
  check_keys(s, "solver",
             {"eps", "gamma", "sigma_frac", "zeta", "rho", "nu", "eta_bar",
              "max_outer", "max_backtracks", "cg_max_iters", "lip_init",
              "fbs_relax"});
  SolverOptions& o = bundle.options;
  if (s.contains("eps")) o.eps = get_number(s, "solver", "eps");
  if (s.contains("sigma_frac")) o.sigma_frac = get_number(s, "solver", "sigma_frac");
  if (s.contains("zeta")) o.zeta = get_number(s, "solver", "zeta");
  if (s.contains("rho")) o.rho = get_number(s, "solver", "rho");
  if (s.contains("nu")) o.nu = get_number(s, "solver", "nu");
  if (s.contains("eta_bar")) o.eta_bar = get_number(s, "solver", "eta_bar");
  if (s.contains("max_outer"))
    o.max_outer = static_cast<int>(get_positive_index(s, "solver", "max_outer"));
  if (s.contains("max_backtracks"))
    o.max_backtracks =
        static_cast<int>(get_positive_index(s, "solver", "max_backtracks"));
  if (s.contains("cg_max_iters"))
    o.cg_max_iters =
        static_cast<int>(get_positive_index(s, "solver", "cg_max_iters"));
  if (s.contains("lip_init")) o.lip_init = get_number(s, "solver", "lip_init");
  if (s.contains("gamma")) {
    double g = get_number(s, "solver", "gamma");
    if (g <= 0.0) fail("config: 'solver.gamma' must be positive");
    bundle.gamma_override = g;
  }
  if (s.contains("fbs_relax")) {
    bundle.fbs_relax = get_number(s, "solver", "fbs_relax");
    if (bundle.fbs_relax <= 0.0)
      fail("config: 'solver.fbs_relax' must be positive");
  }
  try {
    o.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("config: ") + e.what());
  }
}

}  // namespace

ProblemBundle load_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("config: not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("config: top level must be an object");
  check_keys(root, "", {"problem", "solver", "x0"});
  if (!root.contains("problem")) fail("config: missing 'problem' section");
  const json& prob = root.at("problem");
  if (!prob.is_object()) fail("config: 'problem' must be an object");
  if (!prob.contains("kind")) fail("config: missing 'problem.kind'");
  if (!prob.at("kind").is_string()) fail("config: 'problem.kind' must be a string");

  ProblemBundle bundle;
  bundle.kind = prob.at("kind").get<std::string>();
  bundle.seed = 0;
  if (prob.contains("seed")) {
    if (!prob.at("seed").is_number_integer() || prob.at("seed").get<long long>() < 0)
      fail("config: 'problem.seed' must be a nonnegative integer");
    bundle.seed = static_cast<std::uint64_t>(prob.at("seed").get<long long>());
  }
  Rng rng(bundle.seed);

  auto inline_or_generated_regression = [&](Index m_default) {
    GaussianData d;
    if (prob.contains("A") || prob.contains("b")) {
      if (!prob.contains("A") || !prob.contains("b"))
        fail("config: inline data needs both 'problem.A' and 'problem.b'");
      d.A = parse_matrix(prob.at("A"), "problem.A");
      d.b = parse_vector(prob.at("b"), "problem.b");
      if (d.A.rows() != d.b.size())
        fail("config: 'problem.A' and 'problem.b' dimensions disagree");
    } else {
      Index m = prob.contains("m")
                    ? get_positive_index(prob, "problem", "m")
                    : m_default;
      if (!prob.contains("n")) fail("config: missing 'problem.n'");
      Index n = get_positive_index(prob, "problem", "n");
      d = generate_regression(rng, m, n);
    }
    return d;
  };

  if (bundle.kind == "lasso" || bundle.kind == "group_lasso") {
    if (bundle.kind == "lasso")
      check_keys(prob, "problem",
                 {"kind", "m", "n", "seed", "lambda", "lambda_rel", "A", "b"});
    else
      check_keys(prob, "problem",
                 {"kind", "m", "n", "seed", "lambda", "lambda_rel", "A", "b",
                  "groups", "group_size"});
    GaussianData d = inline_or_generated_regression(40);
    bundle.m = d.A.rows();
    bundle.n = d.A.cols();
    double scale = (d.A.transpose() * d.b).lpNorm<Eigen::Infinity>();
    double lam = resolve_weight(prob, scale);
    bundle.smooth = std::make_shared<LeastSquaresSmooth>(d.A, d.b);
    if (bundle.kind == "lasso") {
      bundle.nonsmooth = std::make_shared<L1Norm>(bundle.n, lam);
    } else {
      std::vector<std::vector<Index>> groups;
      if (prob.contains("groups"))
        groups = parse_groups(prob.at("groups"), bundle.n);
      else
        groups = contiguous_groups(
            bundle.n, prob.contains("group_size")
                          ? get_positive_index(prob, "problem", "group_size")
                          : 5);
      try {
        bundle.nonsmooth = std::make_shared<GroupNorms>(bundle.n, groups, lam);
      } catch (const std::invalid_argument& e) {
        fail(std::string("config: 'problem.groups': ") + e.what());
      }
    }
    std::ostringstream os;
    os << bundle.kind << " m=" << bundle.m << " n=" << bundle.n
       << " seed=" << bundle.seed << " lambda=" << lam;
    bundle.summary = os.str();
  } else if (bundle.kind == "logistic_l1") {
    check_keys(prob, "problem",
               {"kind", "m", "n", "seed", "lambda", "lambda_rel", "A", "y"});
    GaussianData d;
    if (prob.contains("A") || prob.contains("y")) {
      if (!prob.contains("A") || !prob.contains("y"))
        fail("config: inline data needs both 'problem.A' and 'problem.y'");
      d.A = parse_matrix(prob.at("A"), "problem.A");
      d.b = parse_vector(prob.at("y"), "problem.y");
      if (d.A.rows() != d.b.size())
        fail("config: 'problem.A' and 'problem.y' dimensions disagree");
    } else {
      Index m = prob.contains("m") ? get_positive_index(prob, "problem", "m") : 40;
      if (!prob.contains("n")) fail("config: missing 'problem.n'");
      Index n = get_positive_index(prob, "problem", "n");
      d = generate_classification(rng, m, n);
    }
    bundle.m = d.A.rows();
    bundle.n = d.A.cols();
    // gradient of the loss at zero is -A^T y / 2; weights are set relative
    // to its peak so the zero solution is never optimal by default
    double scale = 0.5 * (d.A.transpose() * d.b).lpNorm<Eigen::Infinity>();
    double lam = resolve_weight(prob, scale);
    try {
      bundle.smooth = std::make_shared<LogisticSmooth>(d.A, d.b);
    } catch (const std::invalid_argument& e) {
      fail(std::string("config: 'problem.y': ") + e.what());
    }
    bundle.nonsmooth = std::make_shared<L1Norm>(bundle.n, lam);
    std::ostringstream os;
    os << "logistic_l1 m=" << bundle.m << " n=" << bundle.n
       << " seed=" << bundle.seed << " lambda=" << lam;
    bundle.summary = os.str();
  } else if (bundle.kind == "box_qp" || bundle.kind == "custom_quadratic_prox") {
    if (bundle.kind == "box_qp")
      check_keys(prob, "problem",
                 {"kind", "m", "n", "seed", "H", "h", "lower", "upper"});
    else
      check_keys(prob, "problem", {"kind", "m", "n", "seed", "H", "h", "prox"});
    Matrix H;
    Vector h;
    if (prob.contains("H")) {
      H = parse_matrix(prob.at("H"), "problem.H");
      if (H.rows() != H.cols()) fail("config: 'problem.H' must be square");
      h = prob.contains("h") ? parse_vector(prob.at("h"), "problem.h")
                             : Vector::Zero(H.cols());
      if (h.size() != H.cols())
        fail("config: 'problem.H' and 'problem.h' dimensions disagree");
    } else {
      if (!prob.contains("n")) fail("config: missing 'problem.n'");
      Index n = get_positive_index(prob, "problem", "n");
      Index m = prob.contains("m") ? get_positive_index(prob, "problem", "m") : n;
      H = generate_spd(rng, m, n);
      h = rng.gaussian_vector(n);
    }
    bundle.m = H.rows();
    bundle.n = H.cols();
    bundle.smooth = std::make_shared<QuadraticSmooth>(H, h);
    if (bundle.kind == "box_qp") {
      Vector lo = parse_bound(prob.contains("lower") ? prob.at("lower") : json(),
                              bundle.n, 0.0, "problem.lower");
      Vector hi = parse_bound(prob.contains("upper") ? prob.at("upper") : json(),
                              bundle.n, 1.0, "problem.upper");
      try {
        bundle.nonsmooth = std::make_shared<SeparableBox>(lo, hi);
      } catch (const std::invalid_argument& e) {
        fail(std::string("config: 'problem.lower'/'problem.upper': ") + e.what());
      }
    } else {
      if (!prob.contains("prox")) fail("config: missing 'problem.prox'");
      try {
        bundle.nonsmooth = build_prox(prob.at("prox"), bundle.n);
      } catch (const std::invalid_argument& e) {
        fail(std::string("config: 'problem.prox': ") + e.what());
      }
    }
    std::ostringstream os;
    os << bundle.kind << " n=" << bundle.n << " seed=" << bundle.seed;
    bundle.summary = os.str();
  } else {
    fail("config: unknown 'problem.kind' value '" + bundle.kind + "'");
  }

  if (root.contains("x0")) {
    bundle.x0 = parse_vector(root.at("x0"), "x0");
    if (bundle.x0.size() != bundle.n) fail("config: 'x0' must have length n");
  } else {
    bundle.x0 = Vector::Zero(bundle.n);
  }

  if (root.contains("solver")) {
    if (!root.at("solver").is_object())
      fail("config: 'solver' must be an object");
    apply_solver_overrides(root.at("solver"), bundle);
  }
  return bundle;
}

ProblemBundle load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("config: cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config_text(ss.str());
}

}  // namespace fbtn
