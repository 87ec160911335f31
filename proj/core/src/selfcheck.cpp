#include "fbtn/selfcheck.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "fbtn/cg.hpp"
#include "fbtn/config.hpp"
#include "fbtn/fbe.hpp"
#include "fbtn/oracles.hpp"
#include "fbtn/report.hpp"
#include "fbtn/smooth.hpp"
#include "fbtn/solver.hpp"

namespace fbtn {
namespace selfcheck {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

template <class... Ts>
std::string str(Ts&&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}

// Accumulates the worst violation across a sampling loop so a failing check
// reports one concrete counterexample instead of a bare boolean.
class Gauge {
 public:
  // asserts lhs <= rhs
  void le(double lhs, double rhs, const std::string& ctx) {
    double excess = lhs - rhs;
    if (!(excess <= worst_)) {  // also catches NaN
      worst_ = excess;
      where_ = ctx;
    }
    if (!(lhs <= rhs)) bad_ = true;
  }

  void truth(bool cond, const std::string& ctx) {
    if (cond) return;
    bad_ = true;
    if (where_.empty()) where_ = ctx;
  }

  bool ok() const { return !bad_; }

  std::string detail() const {
    if (!bad_) return {};
    if (std::isfinite(worst_) && worst_ > 0.0)
      return str(where_, " (excess ", num(worst_), ")");
    return where_;
  }

 private:
  double worst_ = -kInf;
  std::string where_;
  bool bad_ = false;
};

void emit(std::vector<CheckResult>& out, const std::string& name,
          const Gauge& g) {
  out.push_back({name, g.ok(), g.detail()});
}

double log_uniform(Rng& rng, double lo, double hi) {
  return lo * std::exp(rng.uniform() * std::log(hi / lo));
}

Matrix spd_matrix(Rng& rng, Index n, double lo_eig, double hi_eig) {
  Matrix U = oracles::random_orthogonal(rng, n);
  Vector eigs(n);
  for (Index i = 0; i < n; ++i)
    eigs[i] = lo_eig + (hi_eig - lo_eig) * rng.uniform();
  if (n >= 1) eigs[0] = lo_eig;          // pin both spectrum ends so bounds
  if (n >= 2) eigs[n - 1] = hi_eig;      // are attained, not just approached
  Matrix M = U * eigs.asDiagonal() * U.transpose();
  return 0.5 * (M + Matrix(M.transpose()));
}

void symmetric_extremes(const Matrix& M, double* mu, double* lip) {
  Eigen::MatrixXd Mc = M;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Mc);
  *mu = std::max(0.0, es.eigenvalues().minCoeff());
  *lip = std::max(0.0, es.eigenvalues().maxCoeff());
}

// ---------------------------------------------------------------------------
// differentiability margins

double l1_ball_margin(const Vector& x, double radius) {
  const double root_n = std::sqrt(static_cast<double>(x.size()));
  const double l1 = x.template lpNorm<1>();
  if (l1 <= radius) return (radius - l1) / root_n;
  SimplexProjection pr = project_to_simplex(x.cwiseAbs(), radius);
  double m = (l1 - radius) / root_n;
  for (Index i = 0; i < x.size(); ++i)
    m = std::min(m, std::abs(std::abs(x[i]) - pr.threshold));
  return m;
}

Vector gather(const Vector& x, const std::vector<Index>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out[static_cast<Index>(i)] = x[idx[i]];
  return out;
}

}  // namespace

double differentiability_margin(const ProxOracle& g, const Vector& x,
                                double gamma) {
  if (dynamic_cast<const ZeroProx*>(&g)) return kInf;
  if (dynamic_cast<const AffineSet*>(&g)) return kInf;  // linear map

  if (auto* p = dynamic_cast<const L1Norm*>(&g)) {
    double t = gamma * p->weight();
    if (t == 0.0) return kInf;
    double m = kInf;
    for (Index i = 0; i < x.size(); ++i)
      m = std::min(m, std::abs(std::abs(x[i]) - t));
    return m;
  }
  if (auto* p = dynamic_cast<const SeparableBox*>(&g)) {
    double m = kInf;
    for (Index i = 0; i < x.size(); ++i) {
      if (std::isfinite(p->lower()[i]))
        m = std::min(m, std::abs(x[i] - p->lower()[i]));
      if (std::isfinite(p->upper()[i]))
        m = std::min(m, std::abs(x[i] - p->upper()[i]));
    }
    return m;
  }
  if (auto* p = dynamic_cast<const Halfspace*>(&g)) {
    return std::abs(p->normal().dot(x) - p->offset()) / p->normal().norm();
  }
  if (dynamic_cast<const UnitSimplex*>(&g)) {
    SimplexProjection pr = project_to_simplex(x, 1.0);
    double m = kInf;
    for (Index i = 0; i < x.size(); ++i)
      m = std::min(m, std::abs(x[i] - pr.threshold));
    return m / std::sqrt(static_cast<double>(x.size()));
  }
  if (dynamic_cast<const EuclideanBall*>(&g)) return std::abs(x.norm() - 1.0);
  if (auto* p = dynamic_cast<const EuclideanNorm*>(&g)) {
    double t = gamma * p->weight();
    if (t == 0.0) return kInf;
    return std::abs(x.norm() - t);
  }
  if (auto* p = dynamic_cast<const GroupNorms*>(&g)) {
    double t = gamma * p->weight();
    if (t == 0.0) return kInf;
    double m = kInf;
    for (const auto& grp : p->groups())
      m = std::min(m, std::abs(gather(x, grp).norm() - t));
    return m;
  }
  if (auto* p = dynamic_cast<const LInfNorm*>(&g)) {
    if (p->weight() == 0.0) return kInf;
    return l1_ball_margin(x, gamma * p->weight());
  }
  if (auto* p = dynamic_cast<const L1Ball*>(&g)) {
    return l1_ball_margin(x, p->radius());
  }
  if (dynamic_cast<const SecondOrderCone*>(&g)) {
    const double tail = x.tail(x.size() - 1).norm();
    return std::min(std::abs(x[0] - tail), std::abs(x[0] + tail)) /
           std::sqrt(2.0);
  }
  if (auto* p = dynamic_cast<const SeparableSum*>(&g)) {
    double m = kInf;
    for (const auto& part : p->parts())
      m = std::min(m, differentiability_margin(*part.oracle,
                                               gather(x, part.indices), gamma));
    return m;
  }
  if (auto* p = dynamic_cast<const MoreauConjugate*>(&g)) {
    // prox_{gamma g*}(x) = x - gamma prox_{g/gamma}(x/gamma): branch changes
    // happen exactly where the inner prox changes branch at x/gamma, and
    // distances scale by gamma.
    return gamma * differentiability_margin(p->inner(), x / gamma, 1.0 / gamma);
  }
  return 0.0;  // unknown oracle: report no margin so FD checks skip it
}

bool rayleigh_interval_check(const std::function<Vector(const Vector&)>& op,
                             Index n, double lo, double hi, double tol,
                             int directions, Rng& rng, std::string* detail) {
  Gauge gauge;
  auto probe = [&](const Vector& v, const std::string& ctx) {
    double n2 = v.squaredNorm();
    if (n2 <= 0.0) return;
    double q = v.dot(op(v)) / n2;
    gauge.le(lo - tol, q, str(ctx, ": quotient ", num(q), " below ", num(lo)));
    gauge.le(q, hi + tol, str(ctx, ": quotient ", num(q), " above ", num(hi)));
  };
  for (int d = 0; d < directions; ++d)
    probe(rng.gaussian_vector(n), str("random direction ", d));

  // Drive toward the top of the spectrum, then toward the bottom through the
  // reflected operator s*I - op; extreme eigenvalues outside [lo, hi] are
  // caught deterministically instead of by lucky sampling.
  Vector v = rng.gaussian_vector(n).normalized();
  for (int it = 0; it < 60; ++it) {
    Vector w = op(v);
    double nw = w.norm();
    if (nw < 1e-300) break;
    v = w / nw;
  }
  probe(v, "top-of-spectrum probe");

  const double shift = hi + std::max(1.0, std::abs(hi));
  Vector u = rng.gaussian_vector(n).normalized();
  for (int it = 0; it < 60; ++it) {
    Vector w = shift * u - op(u);
    double nw = w.norm();
    if (nw < 1e-300) break;
    u = w / nw;
  }
  probe(u, "bottom-of-spectrum probe");

  if (detail) *detail = gauge.detail();
  return gauge.ok();
}

// ---------------------------------------------------------------------------
// smooth oracles

namespace {

struct SmoothCase {
  std::string name;
  std::shared_ptr<const SmoothOracle> f;
  std::optional<double> lip_bound;  // certified bound when the oracle has none
};

std::vector<SmoothCase> smooth_cases(Rng& rng) {
  std::vector<SmoothCase> cases;

  cases.push_back({"quad", std::make_shared<QuadraticSmooth>(
                               spd_matrix(rng, 6, 0.3, 5.0),
                               rng.gaussian_vector(6)),
                   std::nullopt});

  {
    Matrix U = oracles::random_orthogonal(rng, 4);
    Vector eigs(4);
    eigs << 0.0, 0.5, 1.5, 4.0;  // rank-deficient but convex
    Matrix H = U * eigs.asDiagonal() * U.transpose();
    cases.push_back({"quad-flat", std::make_shared<QuadraticSmooth>(
                                      H, rng.gaussian_vector(4)),
                     std::nullopt});
  }

  cases.push_back({"least-squares-wide",
                   std::make_shared<LeastSquaresSmooth>(
                       Matrix(0.5 * rng.gaussian_matrix(4, 7)),
                       rng.gaussian_vector(4)),
                   std::nullopt});
  cases.push_back({"least-squares-tall",
                   std::make_shared<LeastSquaresSmooth>(
                       Matrix(0.5 * rng.gaussian_matrix(9, 4)),
                       rng.gaussian_vector(9)),
                   std::nullopt});

  {
    Matrix A = rng.gaussian_matrix(6, 4);
    Vector y(6);
    for (Index i = 0; i < 6; ++i) y[i] = rng.gaussian() >= 0.0 ? 1.0 : -1.0;
    Eigen::MatrixXd AtA = Eigen::MatrixXd(A).transpose() * Eigen::MatrixXd(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(AtA);
    double bound = 0.25 * es.eigenvalues().maxCoeff();
    cases.push_back(
        {"logistic", std::make_shared<LogisticSmooth>(A, y), bound});
  }

  cases.push_back({"zero", std::make_shared<ZeroSmooth>(5), std::nullopt});
  return cases;
}

}  // namespace

std::vector<CheckResult> check_smooth(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng build_rng(seed ^ 0x51a3u);
  auto cases = smooth_cases(build_rng);

  for (const auto& c : cases) {
    const SmoothOracle& f = *c.f;
    const Index n = f.dim();
    Rng rng(seed ^ 0x9000u ^ std::hash<std::string>{}(c.name));

    Gauge sym;
    for (int s = 0; s < 100; ++s) {
      Vector x = 2.0 * rng.gaussian_vector(n);
      Vector p = rng.gaussian_vector(n);
      Vector q = rng.gaussian_vector(n);
      double lhs = f.hess_vec(x, p).dot(q);
      double rhs = f.hess_vec(x, q).dot(p);
      sym.le(std::abs(lhs - rhs), 1e-10 * (1.0 + p.norm() * q.norm()),
             str(c.name, " sample ", s));
    }
    emit(out, "smooth/" + c.name + "/hessian-symmetry", sym);

    Gauge psd;
    for (int s = 0; s < 100; ++s) {
      Vector x = 2.0 * rng.gaussian_vector(n);
      Vector p = rng.gaussian_vector(n);
      psd.le(-p.dot(f.hess_vec(x, p)), 1e-12 * p.squaredNorm(),
             str(c.name, " sample ", s));
    }
    emit(out, "smooth/" + c.name + "/hessian-psd", psd);

    Gauge grad;
    for (int s = 0; s < 20; ++s) {
      Vector x = 2.0 * rng.gaussian_vector(n);
      double step = 1e-6 * (1.0 + x.cwiseAbs().maxCoeff());
      Vector fd = oracles::fd_gradient(
          [&](const Vector& v) { return f.value(v); }, x, step);
      Vector gr = f.gradient(x);
      grad.le((fd - gr).norm(), 1e-5 * (1.0 + gr.norm()),
              str(c.name, " point ", s));
    }
    emit(out, "smooth/" + c.name + "/gradient-vs-fd", grad);

    std::optional<double> lip = c.lip_bound ? c.lip_bound
                                            : f.lipschitz_estimate();
    if (lip) {
      Gauge lemma;
      for (int s = 0; s < 50; ++s) {
        Vector u = 2.0 * rng.gaussian_vector(n);
        Vector v = u + log_uniform(rng, 1e-3, 3.0) * rng.gaussian_vector(n);
        double gap = f.value(v) - f.value(u) - f.gradient(u).dot(v - u);
        double tol = 1e-10 * (1.0 + std::abs(f.value(u)));
        lemma.le(-gap, tol, str(c.name, " pair ", s, " (convexity side)"));
        lemma.le(gap - 0.5 * *lip * (v - u).squaredNorm(), tol,
                 str(c.name, " pair ", s, " (curvature side)"));
      }
      emit(out, "smooth/" + c.name + "/quadratic-upper-bound", lemma);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// prox oracles

namespace {

struct ProxCase {
  std::string name;
  std::shared_ptr<const ProxOracle> g;
};

std::vector<ProxCase> generic_prox_cases(Rng& rng) {
  std::vector<ProxCase> cases;
  cases.push_back({"l1", std::make_shared<L1Norm>(7, 0.7)});

  {
    Vector lo(7), hi(7);
    lo << -1.0, -2.0, -0.5, -kInf, 0.0, -3.0, -1.0;
    hi << 1.0, 0.5, kInf, 2.0, 4.0, 0.0, 3.0;
    cases.push_back({"box", std::make_shared<SeparableBox>(lo, hi)});
  }
  {
    Matrix A = rng.gaussian_matrix(2, 5);
    Vector z = rng.gaussian_vector(5);
    cases.push_back({"affine", std::make_shared<AffineSet>(A, Vector(A * z))});
  }
  {
    Vector a = rng.gaussian_vector(6);
    if (a.norm() < 1e-8) a[0] = 1.0;
    cases.push_back({"halfspace", std::make_shared<Halfspace>(a, 0.3)});
  }
  cases.push_back({"simplex", std::make_shared<UnitSimplex>(6)});
  cases.push_back({"ball", std::make_shared<EuclideanBall>(5)});
  cases.push_back({"l2-norm", std::make_shared<EuclideanNorm>(5, 1.3)});
  cases.push_back(
      {"group-norms",
       std::make_shared<GroupNorms>(
           7, std::vector<std::vector<Index>>{{0, 1, 2}, {3, 4}, {5, 6}},
           0.8)});
  cases.push_back({"linf", std::make_shared<LInfNorm>(6, 0.9)});
  cases.push_back({"soc", std::make_shared<SecondOrderCone>(5)});
  cases.push_back({"l1-ball", std::make_shared<L1Ball>(6, 1.5)});
  cases.push_back({"zero", std::make_shared<ZeroProx>(4)});
  {
    std::vector<SeparableSum::Part> parts;
    parts.push_back({std::make_shared<L1Norm>(2, 0.5), {0, 3}});
    Vector lo(1), hi(1);
    lo << -0.4;
    hi << 0.9;
    parts.push_back({std::make_shared<SeparableBox>(lo, hi), {1}});
    parts.push_back({std::make_shared<EuclideanNorm>(2, 1.0), {2, 4}});
    cases.push_back(
        {"separable-sum", std::make_shared<SeparableSum>(5, std::move(parts))});
  }
  {
    Vector lo = Vector::Constant(5, -0.7), hi = Vector::Constant(5, 0.7);
    cases.push_back({"conjugate-box",
                     std::make_shared<MoreauConjugate>(
                         std::make_shared<SeparableBox>(lo, hi))});
  }
  cases.push_back({"conjugate-ball", std::make_shared<MoreauConjugate>(
                                         std::make_shared<EuclideanBall>(5))});
  cases.push_back({"conjugate-simplex",
                   std::make_shared<MoreauConjugate>(
                       std::make_shared<UnitSimplex>(5))});
  cases.push_back({"conjugate-l1-ball",
                   std::make_shared<MoreauConjugate>(
                       std::make_shared<L1Ball>(5, 2.0))});
  return cases;
}

// Move a perturbed point back into dom g; for indicator terms the prox with
// any stepsize is the Euclidean projection, and finite terms need no help.
Vector into_domain(const ProxOracle& g, Vector w) {
  if (g.value(w).is_inf) w = g.prox(w, 1.0).point;
  return w;
}

}  // namespace

std::vector<CheckResult> check_prox(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng build_rng(seed ^ 0x77u);
  auto cases = generic_prox_cases(build_rng);

  const double perturb_scales[4] = {0.5, 0.1, 0.01, 1e-3};

  for (const auto& c : cases) {
    const ProxOracle& g = *c.g;
    const Index n = g.dim();
    Rng rng(seed ^ 0xA100u ^ std::hash<std::string>{}(c.name));

    Gauge opt;
    for (int s = 0; s < 200; ++s) {
      Vector x = 2.0 * rng.gaussian_vector(n);
      double gamma = log_uniform(rng, 1e-2, 1e2);
      ProxResult pr = g.prox(x, gamma);
      double base = pr.value + (pr.point - x).squaredNorm() / (2.0 * gamma);
      for (int j = 0; j < 20; ++j) {
        double scale = perturb_scales[j % 4] * (1.0 + pr.point.norm());
        Vector w =
            into_domain(g, pr.point + scale * rng.gaussian_vector(n));
        ExtReal gw = g.value(w);
        if (gw.is_inf) continue;
        double cand = gw.v + (w - x).squaredNorm() / (2.0 * gamma);
        opt.le(base - cand, 1e-9 * (1.0 + std::abs(base)),
               str(c.name, " sample ", s, " perturbation ", j));
      }
    }
    emit(out, "prox/" + c.name + "/minimizer-optimality", opt);

    Gauge firm;
    for (int s = 0; s < 100; ++s) {
      Vector x = 2.0 * rng.gaussian_vector(n);
      Vector y = x + log_uniform(rng, 1e-3, 3.0) * rng.gaussian_vector(n);
      double gamma = log_uniform(rng, 1e-2, 1e2);
      Vector dz = g.prox(x, gamma).point - g.prox(y, gamma).point;
      Vector dx = x - y;
      firm.le(dz.squaredNorm() - dz.dot(dx),
              1e-10 * (1.0 + dx.squaredNorm()), str(c.name, " pair ", s));
    }
    emit(out, "prox/" + c.name + "/firm-nonexpansiveness", firm);

    Gauge jac;
    for (int s = 0; s < 100; ++s) {
      Vector x = 2.0 * rng.gaussian_vector(n);
      double gamma = log_uniform(rng, 1e-2, 1e2);
      Vector v = rng.gaussian_vector(n).normalized();
      Vector u = rng.gaussian_vector(n).normalized();
      Vector pv = g.jac_vec(x, gamma, v);
      Vector pu = g.jac_vec(x, gamma, u);
      jac.le(-v.dot(pv), 1e-12, str(c.name, " sample ", s, " (lower)"));
      jac.le(v.dot(pv), 1.0 + 1e-12, str(c.name, " sample ", s, " (upper)"));
      jac.le(std::abs(u.dot(pv) - v.dot(pu)), 1e-10,
             str(c.name, " sample ", s, " (symmetry)"));
    }
    emit(out, "prox/" + c.name + "/jacobian-contraction", jac);

    Gauge dir;
    int accepted = 0;
    for (int attempt = 0; attempt < 600 && accepted < 30; ++attempt) {
      Vector x = 2.0 * rng.gaussian_vector(n);
      double gamma = log_uniform(rng, 0.1, 10.0);
      if (differentiability_margin(g, x, gamma) <= 1e-3) continue;
      ++accepted;
      Vector v = rng.gaussian_vector(n).normalized();
      const double t = 1e-6;
      Vector fd =
          (g.prox(x + t * v, gamma).point - g.prox(x - t * v, gamma).point) /
          (2.0 * t);
      Vector jv = g.jac_vec(x, gamma, v);
      dir.le((fd - jv).norm(), 1e-5 * (1.0 + fd.norm()),
             str(c.name, " accepted sample ", accepted));
    }
    dir.truth(accepted >= 10,
              str(c.name, ": only ", accepted,
                  " differentiable sample(s) found"));
    emit(out, "prox/" + c.name + "/jacobian-vs-fd", dir);

    Gauge env;
    int finite_samples = 0;
    for (int s = 0; s < 100; ++s) {
      Vector x = 2.0 * rng.gaussian_vector(n);
      double gamma = log_uniform(rng, 1e-2, 1e2);
      ExtReal gx = g.value(x);
      if (gx.is_inf) continue;
      ++finite_samples;
      ProxResult pr = g.prox(x, gamma);
      double envelope =
          pr.value + (x - pr.point).squaredNorm() / (2.0 * gamma);
      env.le(envelope - gx.v, 1e-10 * (1.0 + std::abs(gx.v)),
             str(c.name, " sample ", s));
    }
    if (finite_samples > 0)
      emit(out, "prox/" + c.name + "/envelope-below-function", env);
  }

  // Small instances against exhaustive references.
  {
    struct SmallCase {
      std::string name;
      std::shared_ptr<const ProxOracle> g;
    };
    std::vector<SmallCase> small;
    small.push_back({"l1-1d", std::make_shared<L1Norm>(1, 1.0)});
    {
      Vector lo(1), hi(1);
      lo << -0.5;
      hi << 1.0;
      small.push_back({"box-1d", std::make_shared<SeparableBox>(lo, hi)});
    }
    small.push_back({"l2-norm-2d", std::make_shared<EuclideanNorm>(2, 1.2)});
    small.push_back({"ball-2d", std::make_shared<EuclideanBall>(2)});
    {
      Vector a(2);
      a << 1.0, -2.0;
      small.push_back({"halfspace-2d", std::make_shared<Halfspace>(a, 0.5)});
    }
    small.push_back({"linf-2d", std::make_shared<LInfNorm>(2, 0.8)});
    small.push_back({"l1-ball-2d", std::make_shared<L1Ball>(2, 1.0)});
    small.push_back({"soc-2d", std::make_shared<SecondOrderCone>(2)});
    small.push_back({"conjugate-simplex-2d",
                     std::make_shared<MoreauConjugate>(
                         std::make_shared<UnitSimplex>(2))});
    small.push_back({"group-norms-2d",
                     std::make_shared<GroupNorms>(
                         2, std::vector<std::vector<Index>>{{0, 1}}, 0.9)});

    Rng rng(seed ^ 0xB200u);
    for (const auto& c : small) {
      const ProxOracle& g = *c.g;
      const Index n = g.dim();
      Gauge bf;
      for (int s = 0; s < 20; ++s) {
        Vector x = 2.5 * rng.gaussian_vector(n);
        double gamma = log_uniform(rng, 0.05, 5.0);
        Vector z = g.prox(x, gamma).point;
        Vector lo(n), hi(n);
        for (Index i = 0; i < n; ++i) {
          double pad = 4.0 + 2.0 * std::abs(x[i]) + 2.0 * gamma;
          lo[i] = x[i] - pad;
          hi[i] = x[i] + pad;
        }
        Vector ref = oracles::prox_reference(
            [&](const Vector& w) { return g.value(w); }, x, gamma, lo, hi);
        bf.le((z - ref).norm(), 1e-3, str(c.name, " sample ", s));
      }
      emit(out, "prox/" + c.name + "/matches-grid-reference", bf);
    }

    // The simplex has an affine hull of lower dimension, so grid search is
    // replaced by exact support-set enumeration.
    {
      Rng srng(seed ^ 0xB201u);
      UnitSimplex simplex(2);
      Gauge bf;
      for (int s = 0; s < 30; ++s) {
        Vector x = 2.5 * srng.gaussian_vector(2);
        double gamma = log_uniform(srng, 0.05, 5.0);
        Vector z = simplex.prox(x, gamma).point;
        Vector ref = oracles::simplex_projection_reference(x, 1.0);
        bf.le((z - ref).norm(), 1e-9, str("simplex-2d sample ", s));
      }
      emit(out, "prox/simplex-2d/matches-kkt-reference", bf);
    }

    // Same idea for a 2-D affine set: grid along the line's parameter.
    {
      Rng arng(seed ^ 0xB202u);
      Matrix A(1, 2);
      A << 1.0, 2.0;
      Vector b(1);
      b << 1.0;
      AffineSet affine(A, b);
      Vector origin(2), tangent(2);
      origin << 1.0, 0.0;
      tangent << -2.0, 1.0;
      tangent.normalize();
      Gauge bf;
      for (int s = 0; s < 30; ++s) {
        Vector x = 2.5 * arng.gaussian_vector(2);
        double gamma = log_uniform(arng, 0.05, 5.0);
        Vector z = affine.prox(x, gamma).point;
        auto obj = [&](const Vector& t) {
          return (origin + t[0] * tangent - x).squaredNorm();
        };
        Vector tlo(1), thi(1);
        tlo << -20.0;
        thi << 20.0;
        Vector tbest = oracles::grid_minimize(obj, tlo, thi, 41, 10);
        Vector ref = origin + tbest[0] * tangent;
        bf.le((z - ref).norm(), 1e-3, str("affine-2d sample ", s));
      }
      emit(out, "prox/affine-2d/matches-line-reference", bf);
    }
  }

  // Dual-route agreement: support functions evaluated through the conjugate
  // machinery must match the directly implemented norms.
  {
    struct RoutePair {
      std::string name;
      std::shared_ptr<const ProxOracle> direct;
      std::shared_ptr<const ProxOracle> viaconj;
    };
    std::vector<RoutePair> pairs;
    pairs.push_back({"linf-vs-conjugate-l1-ball",
                     std::make_shared<LInfNorm>(5, 0.9),
                     std::make_shared<MoreauConjugate>(
                         std::make_shared<L1Ball>(5, 0.9))});
    {
      Vector lo = Vector::Constant(5, -0.7), hi = Vector::Constant(5, 0.7);
      pairs.push_back({"l1-vs-conjugate-box",
                       std::make_shared<L1Norm>(5, 0.7),
                       std::make_shared<MoreauConjugate>(
                           std::make_shared<SeparableBox>(lo, hi))});
    }
    pairs.push_back({"l2-vs-conjugate-ball",
                     std::make_shared<EuclideanNorm>(5, 1.0),
                     std::make_shared<MoreauConjugate>(
                         std::make_shared<EuclideanBall>(5))});

    Rng rng(seed ^ 0xC300u);
    for (const auto& p : pairs) {
      Gauge route;
      for (int s = 0; s < 50; ++s) {
        Vector x = 2.0 * rng.gaussian_vector(5);
        double gamma = log_uniform(rng, 0.05, 20.0);
        Vector v = rng.gaussian_vector(5);
        Vector zd = p.direct->prox(x, gamma).point;
        Vector zc = p.viaconj->prox(x, gamma).point;
        route.le((zd - zc).norm(), 1e-12 * (1.0 + x.norm()),
                 str(p.name, " prox sample ", s));
        Vector jd = p.direct->jac_vec(x, gamma, v);
        Vector jc = p.viaconj->jac_vec(x, gamma, v);
        route.le((jd - jc).norm(), 1e-12 * (1.0 + v.norm()),
                 str(p.name, " jacobian sample ", s));
        ExtReal vd = p.direct->value(x);
        ExtReal vc = p.viaconj->value(x);
        route.truth(vd.is_inf == vc.is_inf, str(p.name, " value domain ", s));
        if (!vd.is_inf && !vc.is_inf)
          route.le(std::abs(vd.v - vc.v), 1e-12 * (1.0 + std::abs(vd.v)),
                   str(p.name, " value sample ", s));
      }
      emit(out, "prox/route/" + p.name, route);
    }
  }

  return out;
}

// ---------------------------------------------------------------------------
// envelope

namespace {

struct FbeCase {
  std::string name;
  std::shared_ptr<const SmoothOracle> f;
  std::shared_ptr<const ProxOracle> g;
  double lip_bound = 0.0;  // certified upper bound on the gradient Lipschitz
  double lip_init = 1.0;
  std::function<Vector(Rng&)> sample_dom;
  bool quadratic = false;
  double mu_true = 0.0;
  double lip_true = 0.0;
};

std::vector<FbeCase> fbe_cases(Rng& rng) {
  std::vector<FbeCase> cases;
  auto gaussian_sampler = [](Index n, double scale) {
    return [n, scale](Rng& r) { return Vector(scale * r.gaussian_vector(n)); };
  };

  {
    FbeCase c;
    c.name = "quad-l1";
    Matrix H = spd_matrix(rng, 6, 0.5, 4.0);
    auto f = std::make_shared<QuadraticSmooth>(H, rng.gaussian_vector(6));
    c.f = f;
    c.g = std::make_shared<L1Norm>(6, 0.6);
    c.lip_bound = *f->lipschitz_estimate();
    c.sample_dom = gaussian_sampler(6, 1.5);
    c.quadratic = true;
    symmetric_extremes(f->hessian(), &c.mu_true, &c.lip_true);
    cases.push_back(std::move(c));
  }
  {
    FbeCase c;
    c.name = "least-squares-box";
    Matrix A = 0.6 * rng.gaussian_matrix(4, 6);
    auto f = std::make_shared<LeastSquaresSmooth>(A, rng.gaussian_vector(4));
    c.f = f;
    Vector lo(6), hi(6);
    lo << -1.0, -0.5, -kInf, 0.0, -2.0, -1.5;
    hi << 1.0, 2.0, 1.5, kInf, 0.5, 1.5;
    c.g = std::make_shared<SeparableBox>(lo, hi);
    c.lip_bound = *f->lipschitz_estimate();
    c.sample_dom = [lo, hi](Rng& r) {
      Vector x(6);
      for (Index i = 0; i < 6; ++i) {
        double l = std::isfinite(lo[i]) ? lo[i] : -2.0;
        double u = std::isfinite(hi[i]) ? hi[i] : 2.0;
        x[i] = l + (u - l) * r.uniform();
      }
      return x;
    };
    c.quadratic = true;
    Matrix AtA = Matrix(A.transpose() * A);
    symmetric_extremes(AtA, &c.mu_true, &c.lip_true);
    cases.push_back(std::move(c));
  }
  {
    FbeCase c;
    c.name = "logistic-l1";
    Matrix A = rng.gaussian_matrix(5, 4);
    Vector y(5);
    for (Index i = 0; i < 5; ++i) y[i] = rng.gaussian() >= 0.0 ? 1.0 : -1.0;
    c.f = std::make_shared<LogisticSmooth>(A, y);
    c.g = std::make_shared<L1Norm>(4, 0.3);
    Eigen::MatrixXd AtA = Eigen::MatrixXd(A).transpose() * Eigen::MatrixXd(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(AtA);
    c.lip_bound = 0.25 * es.eigenvalues().maxCoeff();
    c.lip_init = c.lip_bound;
    c.sample_dom = gaussian_sampler(4, 1.5);
    cases.push_back(std::move(c));
  }
  {
    FbeCase c;
    c.name = "quad-simplex";
    Matrix H = spd_matrix(rng, 5, 0.8, 3.0);
    auto f = std::make_shared<QuadraticSmooth>(H, rng.gaussian_vector(5));
    c.f = f;
    c.g = std::make_shared<UnitSimplex>(5);
    c.lip_bound = *f->lipschitz_estimate();
    c.sample_dom = [](Rng& r) {
      Vector x = r.gaussian_vector(5).cwiseAbs();
      double s = x.sum();
      if (s < 1e-12) return Vector(Vector::Constant(5, 0.2));
      return Vector(x / s);
    };
    c.quadratic = true;
    symmetric_extremes(f->hessian(), &c.mu_true, &c.lip_true);
    cases.push_back(std::move(c));
  }
  {
    FbeCase c;
    c.name = "quad-ball";
    Matrix H = spd_matrix(rng, 4, 0.5, 2.0);
    auto f = std::make_shared<QuadraticSmooth>(H, rng.gaussian_vector(4));
    c.f = f;
    c.g = std::make_shared<EuclideanBall>(4);
    c.lip_bound = *f->lipschitz_estimate();
    c.sample_dom = [](Rng& r) {
      Vector x = r.gaussian_vector(4);
      double nrm = x.norm();
      if (nrm < 1e-12) return Vector(Vector::Zero(4));
      return Vector(x * (0.95 * r.uniform() / nrm));
    };
    c.quadratic = true;
    symmetric_extremes(f->hessian(), &c.mu_true, &c.lip_true);
    cases.push_back(std::move(c));
  }
  {
    FbeCase c;
    c.name = "quad-soc";
    Matrix H = spd_matrix(rng, 4, 0.4, 2.5);
    auto f = std::make_shared<QuadraticSmooth>(H, rng.gaussian_vector(4));
    c.f = f;
    c.g = std::make_shared<SecondOrderCone>(4);
    c.lip_bound = *f->lipschitz_estimate();
    c.sample_dom = [](Rng& r) {
      Vector tail = r.gaussian_vector(3);
      Vector x(4);
      x[0] = tail.norm() + std::abs(r.gaussian()) + 0.1;
      x.tail(3) = tail;
      return x;
    };
    c.quadratic = true;
    symmetric_extremes(f->hessian(), &c.mu_true, &c.lip_true);
    cases.push_back(std::move(c));
  }
  {
    FbeCase c;
    c.name = "proximal-point-l1";
    c.f = std::make_shared<ZeroSmooth>(5);
    c.g = std::make_shared<L1Norm>(5, 0.8);
    c.lip_bound = 0.0;
    c.lip_init = 1.0;
    c.sample_dom = gaussian_sampler(5, 1.5);
    c.quadratic = true;  // H = 0
    c.mu_true = 0.0;
    c.lip_true = 0.0;
    cases.push_back(std::move(c));
  }
  {
    FbeCase c;
    c.name = "quad-zero";
    Matrix H = spd_matrix(rng, 5, 0.6, 3.5);
    auto f = std::make_shared<QuadraticSmooth>(H, rng.gaussian_vector(5));
    c.f = f;
    c.g = std::make_shared<ZeroProx>(5);
    c.lip_bound = *f->lipschitz_estimate();
    c.sample_dom = gaussian_sampler(5, 1.5);
    c.quadratic = true;
    symmetric_extremes(f->hessian(), &c.mu_true, &c.lip_true);
    cases.push_back(std::move(c));
  }
  {
    // Large weight: the prox Jacobian vanishes near the origin, pushing the
    // envelope curvature toward its upper bound.
    FbeCase c;
    c.name = "quad-l1-saturated";
    Matrix H = spd_matrix(rng, 5, 0.7, 4.0);
    auto f = std::make_shared<QuadraticSmooth>(H, rng.gaussian_vector(5));
    c.f = f;
    c.g = std::make_shared<L1Norm>(5, 1e3);
    c.lip_bound = *f->lipschitz_estimate();
    c.sample_dom = gaussian_sampler(5, 0.1);
    c.quadratic = true;
    symmetric_extremes(f->hessian(), &c.mu_true, &c.lip_true);
    cases.push_back(std::move(c));
  }
  {
    FbeCase c;
    c.name = "quad-conjugate-l1-ball";
    Matrix H = spd_matrix(rng, 5, 0.5, 3.0);
    auto f = std::make_shared<QuadraticSmooth>(H, rng.gaussian_vector(5));
    c.f = f;
    c.g = std::make_shared<MoreauConjugate>(std::make_shared<L1Ball>(5, 1.0));
    c.lip_bound = *f->lipschitz_estimate();
    c.sample_dom = gaussian_sampler(5, 1.5);
    c.quadratic = true;
    symmetric_extremes(f->hessian(), &c.mu_true, &c.lip_true);
    cases.push_back(std::move(c));
  }
  return cases;
}

}  // namespace

std::vector<CheckResult> check_fbe(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng build_rng(seed ^ 0xFBEu);
  auto cases = fbe_cases(build_rng);

  for (const auto& c : cases) {
    FbeProblem problem(c.f, c.g, c.lip_init);
    const Index n = problem.dim();
    const double gamma = problem.gamma();
    Rng rng(seed ^ 0xD400u ^ std::hash<std::string>{}(c.name));

    Gauge sandwich;
    Gauge decrease;
    for (int s = 0; s < 30; ++s) {
      Vector x = c.sample_dom(rng);
      FbePoint pt = problem.evaluate(x);
      ExtReal phix = problem.phi(x);
      ExtReal phit = problem.phi(pt.tx);
      sandwich.truth(!phix.is_inf, str(c.name, " sample ", s, ": phi(x) inf"));
      sandwich.truth(!phit.is_inf,
                     str(c.name, " sample ", s, ": phi(T x) inf"));
      if (phix.is_inf || phit.is_inf) continue;
      double dist2 = (x - pt.tx).squaredNorm();
      double tol =
          1e-9 * (1.0 + std::abs(phix.v) + std::abs(pt.fbe));
      // envelope below the function by the proximal decrease
      sandwich.le(pt.fbe - (phix.v - dist2 / (2.0 * gamma)), tol,
                  str(c.name, " sample ", s, " (upper chain)"));
      // function after the step below the envelope by the remaining margin
      double coeff = (1.0 - gamma * c.lip_bound) / (2.0 * gamma);
      sandwich.le(phit.v - (pt.fbe - coeff * dist2), tol,
                  str(c.name, " sample ", s, " (lower chain)"));
      double drop = (2.0 - gamma * c.lip_bound) / (2.0 * gamma);
      decrease.le(phit.v - (phix.v - drop * dist2), tol,
                  str(c.name, " sample ", s));
    }
    emit(out, "fbe/" + c.name + "/sandwich-chain", sandwich);
    emit(out, "fbe/" + c.name + "/forward-backward-decrease", decrease);

    Gauge nonexp;
    for (int s = 0; s < 30; ++s) {
      Vector x = 2.0 * rng.gaussian_vector(n);
      Vector y = x + log_uniform(rng, 1e-3, 3.0) * rng.gaussian_vector(n);
      Vector tx = problem.evaluate(x).tx;
      Vector ty = problem.evaluate(y).tx;
      nonexp.le((tx - ty).norm() - (x - y).norm(),
                1e-12 * (1.0 + (x - y).norm()), str(c.name, " pair ", s));
    }
    emit(out, "fbe/" + c.name + "/step-map-nonexpansive", nonexp);

    Gauge grad;
    int accepted = 0;
    for (int attempt = 0; attempt < 200 && accepted < 12; ++attempt) {
      Vector x = c.sample_dom(rng);
      FbePoint pt = problem.evaluate(x);
      if (differentiability_margin(*c.g, pt.forward, gamma) <= 1e-3) continue;
      ++accepted;
      double step = 1e-6 * (1.0 + x.cwiseAbs().maxCoeff());
      Vector fd = oracles::fd_gradient(
          [&](const Vector& v) { return problem.evaluate(v).fbe; }, x, step);
      grad.le((fd - pt.fbe_grad).norm(), 1e-5 * (1.0 + pt.fbe_grad.norm()),
              str(c.name, " accepted point ", accepted));
    }
    grad.truth(accepted >= 5,
               str(c.name, ": only ", accepted,
                   " differentiable sample(s) found"));
    emit(out, "fbe/" + c.name + "/gradient-vs-fd", grad);

    Gauge hv;
    for (int s = 0; s < 30; ++s) {
      Vector x = c.sample_dom(rng);
      FbePoint pt = problem.evaluate(x);
      Vector p = rng.gaussian_vector(n).normalized();
      Vector q = rng.gaussian_vector(n).normalized();
      Vector hp = problem.hess_vec_fbe(pt, p);
      Vector hq = problem.hess_vec_fbe(pt, q);
      hv.le(std::abs(q.dot(hp) - p.dot(hq)),
            1e-10 * (1.0 + hp.norm() + hq.norm()),
            str(c.name, " sample ", s, " (symmetry)"));
      hv.le(-p.dot(hp), 1e-12 * (1.0 + 1.0 / gamma),
            str(c.name, " sample ", s, " (psd)"));
    }
    emit(out, "fbe/" + c.name + "/hessian-action-symmetric-psd", hv);

    if (c.quadratic) {
      const double mu = c.mu_true;
      const double lip = c.lip_true;
      double lo = std::min(mu * (1.0 - gamma * mu), lip * (1.0 - gamma * lip));
      double hi = (1.0 - gamma * mu) / gamma;
      Gauge interval;
      for (int pts = 0; pts < 3; ++pts) {
        Vector x = c.sample_dom(rng);
        FbePoint pt = problem.evaluate(x);
        std::string detail;
        bool ok = rayleigh_interval_check(
            [&](const Vector& p) { return problem.hess_vec_fbe(pt, p); }, n,
            lo, hi, 1e-8 * std::max(1.0, hi), 20, rng, &detail);
        interval.truth(ok, str(c.name, " point ", pts, ": ", detail));
      }
      emit(out, "fbe/" + c.name + "/hessian-spectrum-interval", interval);

      Gauge mono;
      double mu_env = std::min(mu * (1.0 - gamma * mu),
                               lip * (1.0 - gamma * lip));
      double lip_env = (1.0 - gamma * mu) / gamma;
      for (int s = 0; s < 30; ++s) {
        Vector x = 2.0 * rng.gaussian_vector(n);
        Vector y = x + log_uniform(rng, 1e-2, 2.0) * rng.gaussian_vector(n);
        Vector gx = problem.evaluate(x).fbe_grad;
        Vector gy = problem.evaluate(y).fbe_grad;
        Vector dx = x - y;
        mono.le(mu_env * dx.squaredNorm() - (gx - gy).dot(dx),
                1e-9 * (1.0 + dx.squaredNorm()),
                str(c.name, " pair ", s, " (strong monotonicity)"));
        mono.le((gx - gy).norm() - lip_env * dx.norm(),
                1e-9 * (1.0 + lip_env * dx.norm()),
                str(c.name, " pair ", s, " (gradient lipschitz)"));
      }
      emit(out, "fbe/" + c.name + "/quadratic-convexity-bounds", mono);
    }
  }

  // Envelope pinched between the two Moreau envelopes of the composite
  // function, on instances small enough for exhaustive envelope oracles.
  {
    Rng rng(seed ^ 0xE500u);

    {
      auto f = std::make_shared<QuadraticSmooth>(
          Matrix(Matrix::Constant(1, 1, 2.0)), Vector(Vector::Constant(1, 0.3)));
      auto g = std::make_shared<L1Norm>(1, 0.5);
      FbeProblem problem(f, g);
      const double gamma = problem.gamma();
      const double lip = problem.lipschitz();
      auto phi = [&](double w) {
        Vector v(1);
        v << w;
        return f->value(v) + g->value(v).v;
      };
      Gauge bracket;
      const double points[5] = {-2.3, -0.6, 0.1, 0.9, 2.2};
      for (double p : points) {
        Vector x(1);
        x << p;
        double env = problem.evaluate(x).fbe;
        double outer = oracles::moreau_envelope_1d(phi, p, gamma, -20.0, 20.0);
        double gamma_inner = gamma / (1.0 - gamma * lip);
        double inner =
            oracles::moreau_envelope_1d(phi, p, gamma_inner, -20.0, 20.0);
        double tol = 1e-6 * (1.0 + std::abs(env));
        bracket.le(env - outer, tol, str("1d point ", num(p), " (upper)"));
        bracket.le(inner - env, tol, str("1d point ", num(p), " (lower)"));
      }
      emit(out, "fbe/moreau-bracket-1d", bracket);
    }

    {
      Matrix H(2, 2);
      H << 3.0, 0.4, 0.4, 1.0;
      Vector h(2);
      h << 0.1, -0.2;
      auto f = std::make_shared<QuadraticSmooth>(H, h);
      auto run_case = [&](const std::string& name,
                          std::shared_ptr<const ProxOracle> g,
                          const std::vector<Vector>& points, double box_lo,
                          double box_hi) {
        FbeProblem problem(f, g);
        const double gamma = problem.gamma();
        const double lip = problem.lipschitz();
        auto phi = [&](const Vector& w) {
          ExtReal gv = g->value(w);
          if (gv.is_inf) return kInf;
          return f->value(w) + gv.v;
        };
        Gauge bracket;
        for (std::size_t i = 0; i < points.size(); ++i) {
          const Vector& x = points[i];
          double env = problem.evaluate(x).fbe;
          Vector lo = Vector::Constant(2, box_lo);
          Vector hi = Vector::Constant(2, box_hi);
          auto moreau = [&](double par) {
            auto obj = [&](const Vector& w) {
              double v = phi(w);
              if (!std::isfinite(v)) return kInf;
              return v + (w - x).squaredNorm() / (2.0 * par);
            };
            Vector w = oracles::grid_minimize(obj, lo, hi, 41, 12);
            return obj(w);
          };
          double outer = moreau(gamma);
          double inner = moreau(gamma / (1.0 - gamma * lip));
          double tol = 1e-6 * (1.0 + std::abs(env));
          bracket.le(env - outer, tol, str(name, " point ", i, " (upper)"));
          bracket.le(inner - env, tol, str(name, " point ", i, " (lower)"));
        }
        emit(out, "fbe/moreau-bracket-" + name, bracket);
      };

      std::vector<Vector> pts;
      for (int i = 0; i < 4; ++i) pts.push_back(1.5 * rng.gaussian_vector(2));
      run_case("2d-l1", std::make_shared<L1Norm>(2, 0.6), pts, -8.0, 8.0);
      std::vector<Vector> ball_pts;
      for (int i = 0; i < 4; ++i)
        ball_pts.push_back(0.8 * rng.gaussian_vector(2));
      run_case("2d-ball", std::make_shared<EuclideanBall>(2), ball_pts, -1.5,
               1.5);
    }
  }

  return out;
}

// ---------------------------------------------------------------------------
// inner linear solver

std::vector<CheckResult> check_cg(std::uint64_t seed) {
  std::vector<CheckResult> out;

  {
    Rng rng(seed ^ 0x1C6u);
    Gauge contract;
    const Index n = 30;
    for (int t = 0; t < 20; ++t) {
      Matrix M = spd_matrix(rng, n, 0.5, 10.0);
      Vector rhs = rng.gaussian_vector(n);
      auto matvec = [&](const Vector& v) { return Vector(M * v); };
      CgOutcome cg =
          cg_solve(matvec, rhs, 1e-10, Vector::Zero(n), static_cast<int>(n) + 5);
      contract.truth(cg.status == CgStatus::Converged,
                     str("system ", t, ": no convergence in n+5 iterations"));
      contract.le((M * cg.direction - rhs).norm(), 1e-10 * (1.0 + 1e-12),
                  str("system ", t, " residual"));
    }
    emit(out, "cg/exit-contract-and-finite-termination", contract);
  }

  {
    Rng rng(seed ^ 0x2C6u);
    Gauge warm;
    const Index n = 20;
    for (int t = 0; t < 20; ++t) {
      Matrix M = spd_matrix(rng, n, 0.8, 6.0);
      Vector rhs = rng.gaussian_vector(n);
      Vector d0 = rng.gaussian_vector(n);
      auto matvec = [&](const Vector& v) { return Vector(M * v); };
      CgOutcome warm_run = cg_solve(matvec, rhs, 1e-8, d0, 3 * (int)n);
      Vector shifted_rhs = rhs - M * d0;
      CgOutcome cold_run =
          cg_solve(matvec, shifted_rhs, 1e-8, Vector::Zero(n), 3 * (int)n);
      warm.le((warm_run.direction - (d0 + cold_run.direction)).norm(),
              1e-12 * (1.0 + d0.norm() + cold_run.direction.norm()),
              str("system ", t));
      warm.truth(warm_run.iterations == cold_run.iterations,
                 str("system ", t, ": iteration counts differ"));
    }
    emit(out, "cg/warm-start-consistency", warm);
  }

  {
    Rng rng(seed ^ 0x3C6u);
    Gauge energy;
    const Index n = 25;
    for (int t = 0; t < 10; ++t) {
      Matrix M = spd_matrix(rng, n, 0.5, 8.0);
      Eigen::MatrixXd Mc = M;
      Vector rhs = rng.gaussian_vector(n);
      Vector dstar = Mc.ldlt().solve(rhs);
      auto matvec = [&](const Vector& v) { return Vector(M * v); };
      std::vector<double> errs;
      Vector e0 = -dstar;
      errs.push_back(std::sqrt(e0.dot(Mc * e0)));
      auto observer = [&](const Vector& d) {
        Vector e = d - dstar;
        errs.push_back(std::sqrt(e.dot(Mc * e)));
      };
      cg_solve(matvec, rhs, 1e-13, Vector::Zero(n), 2 * (int)n, observer);
      for (std::size_t j = 0; j + 1 < errs.size(); ++j)
        energy.le(errs[j + 1] - errs[j], 1e-12 * (1.0 + errs[0]),
                  str("system ", t, " update ", j));
    }
    emit(out, "cg/energy-error-monotone", energy);
  }

  {
    Gauge edge;
    Matrix M = Matrix::Identity(3, 3);
    auto matvec = [&](const Vector& v) { return Vector(M * v); };
    CgOutcome cg = cg_solve(matvec, Vector::Zero(3), 1e-12, Vector::Zero(3), 10);
    edge.truth(cg.status == CgStatus::Converged && cg.iterations == 0,
               "zero right-hand side should converge immediately");
    edge.le(cg.direction.norm(), 0.0, "zero rhs direction");

    Matrix S = Matrix::Zero(3, 3);
    S(0, 0) = 1.0;
    S(1, 1) = 1.0;
    auto singular = [&](const Vector& v) { return Vector(S * v); };
    Vector rhs(3);
    rhs << 0.0, 0.0, 1.0;
    CgOutcome bad = cg_solve(singular, rhs, 1e-10, Vector::Zero(3), 10);
    edge.truth(bad.status == CgStatus::NegativeCurvature,
               "singular system must trip the curvature guard");
    emit(out, "cg/degenerate-inputs", edge);
  }

  return out;
}

// ---------------------------------------------------------------------------
// outer driver

namespace {

std::string strip_last_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    auto pos = line.rfind(',');
    out += (pos == std::string::npos) ? line : line.substr(0, pos);
    out += '\n';
  }
  return out;
}

}  // namespace

std::vector<CheckResult> check_driver(std::uint64_t seed) {
  std::vector<CheckResult> out;

  const std::string lasso_cfg = R"({
    "problem": {"kind": "lasso", "m": 30, "n": 60, "seed": 11,
                "lambda_rel": 0.1},
    "solver": {"eps": 1e-9}
  })";

  // Monotone envelope descent and the telescoped residual bound.
  {
    ProblemBundle bundle = load_config_text(lasso_cfg);
    FbeProblem problem(bundle.smooth, bundle.nonsmooth,
                       bundle.options.lip_init, bundle.gamma_override);
    const double step_product = problem.gamma() * problem.lipschitz();
    const double sigma_frac = bundle.options.sigma_frac;
    Solution sol = fbtn_solve(problem, bundle.x0, bundle.options);

    Gauge descent;
    descent.truth(sol.status == SolveStatus::ResidualBelowTol,
                  "lasso run did not converge");
    auto sigma_at = [&](double gamma) {
      return sigma_frac * 0.5 * gamma * (1.0 - step_product);
    };
    double residual_sum = 0.0;
    for (std::size_t i = 0; i < sol.trace.size(); ++i) {
      const auto& rec = sol.trace[i];
      residual_sum += sigma_at(rec.gamma) * rec.res_norm * rec.res_norm;
      double next_fbe;
      double next_gamma;
      if (i + 1 < sol.trace.size()) {
        next_fbe = sol.trace[i + 1].fbe;
        next_gamma = sol.trace[i + 1].gamma;
      } else {
        next_fbe = sol.final_point.fbe;
        next_gamma = problem.gamma();
      }
      if (next_gamma != rec.gamma) continue;  // envelope changed definition
      descent.le(next_fbe - (rec.fbe - sigma_at(rec.gamma) * rec.res_norm *
                                           rec.res_norm),
                 1e-9 * (1.0 + std::abs(rec.fbe)), str("step ", rec.k));
    }
    emit(out, "driver/lasso/envelope-descent-per-step", descent);

    Gauge sum;
    if (!sol.trace.empty()) {
      ExtReal phi_final = problem.phi(sol.final_point.tx);
      sum.truth(!phi_final.is_inf, "phi at the solution is infinite");
      if (!phi_final.is_inf)
        sum.le(residual_sum, sol.trace.front().fbe - phi_final.v +
                                 1e-6 * (1.0 + std::abs(sol.trace.front().fbe)),
               "telescoped residual bound");
    }
    emit(out, "driver/lasso/residual-sum-bounded", sum);

    // Restarting at the solution must stop before producing any record.
    FbeProblem again(bundle.smooth, bundle.nonsmooth, bundle.options.lip_init,
                     bundle.gamma_override);
    SolverOptions loose = bundle.options;
    loose.eps = 1e-6;
    Solution at_solution = fbtn_solve(again, sol.x, loose);
    Gauge immediate;
    immediate.truth(at_solution.status == SolveStatus::ResidualBelowTol,
                    "restart at solution did not converge");
    immediate.truth(at_solution.trace.empty(),
                    str("expected an empty trace, got ",
                        at_solution.trace.size(), " records"));
    immediate.le((at_solution.x - sol.x).norm(), 0.0,
                 "restart must return its input");
    emit(out, "driver/lasso/immediate-convergence", immediate);
  }

  // Superlinear tail: unit steps and strict Q-linear envelope contraction on
  // a strongly convex instance.
  {
    Rng rng(seed ^ 0xD1u);
    Matrix H = spd_matrix(rng, 30, 1.0, 4.0);
    auto f = std::make_shared<QuadraticSmooth>(H, rng.gaussian_vector(30));
    auto g = std::make_shared<L1Norm>(30, 0.3);
    FbeProblem problem(f, g);
    SolverOptions opts;
    opts.eps = 1e-11;
    Vector x0 = 3.0 * rng.gaussian_vector(30);
    Solution sol = fbtn_solve(problem, x0, opts);

    Gauge tail;
    tail.truth(sol.status == SolveStatus::ResidualBelowTol,
               "strongly convex run did not converge");
    bool past_threshold = false;
    for (const auto& rec : sol.trace) {
      if (rec.res_norm <= 1e-3) past_threshold = true;
      if (past_threshold)
        tail.truth(rec.tau == 1.0,
                   str("step ", rec.k, ": tau ", num(rec.tau),
                       " after residual fell below 1e-3"));
    }
    tail.truth(past_threshold, "residual never fell below 1e-3");
    if (!sol.trace.empty())
      tail.truth(sol.trace.back().tau == 1.0,
                 str("final step has tau ", num(sol.trace.back().tau)));
    emit(out, "driver/strongly-convex/unit-step-tail", tail);

    Gauge qlinear;
    double phi_star = sol.final_point.fbe;
    int contractions = 0;
    for (std::size_t i = 0; i + 1 < sol.trace.size(); ++i) {
      double a = sol.trace[i].fbe - phi_star;
      double b = sol.trace[i + 1].fbe - phi_star;
      if (a <= 1e-9 * (1.0 + std::abs(phi_star))) continue;
      ++contractions;
      qlinear.le(b, (1.0 - 1e-6) * a,
                 str("steps ", sol.trace[i].k, "->", sol.trace[i + 1].k));
    }
    qlinear.truth(contractions >= 3,
                  str("only ", contractions, " measurable contraction(s)"));
    emit(out, "driver/strongly-convex/q-linear-envelope-decay", qlinear);
  }

  // Backtracking stepsize discovery: gamma nonincreasing, few distinct
  // values, bounded halving budget.
  {
    const std::string cfg = R"({
      "problem": {"kind": "logistic_l1", "m": 25, "n": 12, "seed": 5,
                  "lambda_rel": 0.05},
      "solver": {"eps": 1e-8, "lip_init": 0.001}
    })";
    ProblemBundle bundle = load_config_text(cfg);
    FbeProblem problem(bundle.smooth, bundle.nonsmooth,
                       bundle.options.lip_init, bundle.gamma_override);
    Solution sol = fbtn_solve(problem, bundle.x0, bundle.options);

    Gauge adapt;
    adapt.truth(sol.status == SolveStatus::ResidualBelowTol,
                "logistic run did not converge");
    int distinct = sol.trace.empty() ? 0 : 1;
    for (std::size_t i = 0; i + 1 < sol.trace.size(); ++i) {
      adapt.le(sol.trace[i + 1].gamma, sol.trace[i].gamma,
               str("gamma increased at step ", sol.trace[i + 1].k));
      if (sol.trace[i + 1].gamma != sol.trace[i].gamma) ++distinct;
    }
    adapt.truth(distinct <= 61,
                str(distinct, " distinct stepsizes in one run"));
    adapt.truth(problem.gamma_halvings() <= 60,
                str(problem.gamma_halvings(), " halvings"));
    adapt.truth(problem.gamma_halvings() >= 1,
                "tiny initial curvature guess should force at least one "
                "halving");
    emit(out, "driver/logistic/stepsize-adaptation", adapt);
  }

  // Bit-identical reruns.
  {
    auto run_csv = [&]() {
      ProblemBundle bundle = load_config_text(lasso_cfg);
      FbeProblem problem(bundle.smooth, bundle.nonsmooth,
                         bundle.options.lip_init, bundle.gamma_override);
      Solution sol = fbtn_solve(problem, bundle.x0, bundle.options);
      return trace_to_csv(sol.trace);
    };
    Gauge determinism;
    std::string a = strip_last_column(run_csv());
    std::string b = strip_last_column(run_csv());
    determinism.truth(a == b, "two identical runs produced different traces");
    emit(out, "driver/lasso/deterministic-reruns", determinism);
  }

  // Splitting baseline: relaxed forward-backward iterations decrease the
  // envelope monotonically and reach the same tolerance.
  {
    Rng rng(seed ^ 0xD2u);
    Matrix H = spd_matrix(rng, 10, 0.8, 3.0);
    auto f = std::make_shared<QuadraticSmooth>(H, rng.gaussian_vector(10));
    auto g = std::make_shared<L1Norm>(10, 0.4);
    FbeProblem problem(f, g);
    Vector x0 = 2.0 * rng.gaussian_vector(10);
    Solution sol = fbs_solve(problem, x0, 1.0, 1e-7, 200000);

    Gauge fbs;
    fbs.truth(sol.status == SolveStatus::ResidualBelowTol,
              "splitting run did not converge");
    for (std::size_t i = 0; i + 1 < sol.trace.size(); ++i)
      fbs.le(sol.trace[i + 1].fbe - sol.trace[i].fbe,
             1e-12 * (1.0 + std::abs(sol.trace[i].fbe)),
             str("step ", sol.trace[i + 1].k));
    for (const auto& rec : sol.trace) {
      fbs.truth(rec.cg_iters == 0 && !rec.cg_status,
                str("step ", rec.k, " reports an inner solve"));
      fbs.truth(rec.tau == 1.0, str("step ", rec.k, " relaxation mismatch"));
    }
    emit(out, "driver/splitting/monotone-envelope", fbs);
  }

  return out;
}

// ---------------------------------------------------------------------------
// trace and config plumbing

std::vector<CheckResult> check_reporting(std::uint64_t seed) {
  std::vector<CheckResult> out;

  const std::string cfg = R"({
    "problem": {"kind": "lasso", "m": 15, "n": 25, "seed": 21,
                "lambda_rel": 0.15},
    "solver": {"eps": 1e-8}
  })";

  auto solve_once = [&]() {
    ProblemBundle bundle = load_config_text(cfg);
    FbeProblem problem(bundle.smooth, bundle.nonsmooth,
                       bundle.options.lip_init, bundle.gamma_override);
    return fbtn_solve(problem, bundle.x0, bundle.options);
  };

  {
    Gauge schema;
    Solution sol = solve_once();
    std::string csv = trace_to_csv(sol.trace);
    std::string header(kTraceHeader);
    schema.truth(csv.rfind(header + "\n", 0) == 0,
                 "trace does not start with the fixed header");
    std::vector<IterationRecord> parsed;
    bool parse_ok = true;
    std::string parse_err;
    try {
      parsed = parse_trace_csv(csv);
    } catch (const std::exception& e) {
      parse_ok = false;
      parse_err = e.what();
    }
    schema.truth(parse_ok, str("trace does not parse: ", parse_err));
    if (parse_ok) {
      schema.truth(parsed.size() == sol.trace.size(),
                   str("parsed ", parsed.size(), " of ", sol.trace.size(),
                       " records"));
      for (std::size_t i = 0; i < parsed.size() && i < sol.trace.size(); ++i) {
        const auto& a = sol.trace[i];
        const auto& b = parsed[i];
        bool same = a.k == b.k && a.fbe == b.fbe && a.res_norm == b.res_norm &&
                    a.tau == b.tau && a.cg_iters == b.cg_iters &&
                    a.cg_status == b.cg_status && a.delta == b.delta &&
                    a.eps_inner == b.eps_inner && a.gamma == b.gamma &&
                    a.hessvec_total == b.hessvec_total &&
                    a.prox_total == b.prox_total && a.wall_ms == b.wall_ms;
        schema.truth(same, str("record ", i, " does not round-trip"));
      }
    }
    emit(out, "reporting/trace-round-trip", schema);
  }

  {
    Gauge repro;
    std::string a = strip_last_column(trace_to_csv(solve_once().trace));
    std::string b = strip_last_column(trace_to_csv(solve_once().trace));
    repro.truth(a == b,
                "identical config and seed gave different trace bytes");
    emit(out, "reporting/seeded-reproducibility", repro);
  }

  {
    Gauge gen;
    ProblemBundle b1 = load_config_text(cfg);
    ProblemBundle b2 = load_config_text(cfg);
    auto* f1 = dynamic_cast<const LeastSquaresSmooth*>(b1.smooth.get());
    auto* f2 = dynamic_cast<const LeastSquaresSmooth*>(b2.smooth.get());
    gen.truth(f1 != nullptr && f2 != nullptr,
              "lasso config should build a least-squares term");
    if (f1 && f2) {
      gen.truth(f1->matrix() == f2->matrix(),
                "generated design matrices differ");
      gen.truth(f1->rhs() == f2->rhs(), "generated observations differ");
    }
    emit(out, "reporting/generator-determinism", gen);
  }

  {
    Gauge errors;
    bool threw = false;
    std::string msg;
    try {
      load_config_text(R"({"problem": {"kind": "lasso", "m": 5, "n": 8,
                           "seed": 1, "frobnicate": 2}})");
    } catch (const ConfigError& e) {
      threw = true;
      msg = e.what();
    }
    errors.truth(threw, "unknown key accepted");
    errors.truth(msg.find("frobnicate") != std::string::npos,
                 str("message does not name the bad key: ", msg));

    threw = false;
    try {
      load_config_text(R"({"problem": {"kind": "lasso", "m": 5, "n": 8,
                           "seed": 1, "lambda": -0.5}})");
    } catch (const ConfigError& e) {
      threw = true;
      msg = e.what();
    }
    errors.truth(threw, "negative weight accepted");
    errors.truth(msg.find("lambda") != std::string::npos,
                 str("message does not name the bad key: ", msg));
    emit(out, "reporting/config-error-naming", errors);
  }

  (void)seed;
  return out;
}

std::vector<CheckResult> run_all(std::uint64_t seed) {
  std::vector<CheckResult> all;
  for (auto&& part :
       {check_smooth(seed), check_prox(seed), check_fbe(seed), check_cg(seed),
        check_driver(seed), check_reporting(seed)})
    all.insert(all.end(), part.begin(), part.end());
  return all;
}

}  // namespace selfcheck
}  // namespace fbtn
