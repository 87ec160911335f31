#include "fbtn/solver.hpp"

#include <chrono>
#include <cmath>

namespace fbtn {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double sufficient_decrease_sigma(const FbeProblem& problem, double frac) {
  double g = problem.gamma();
  double gl = g * problem.lipschitz();
  return frac * 0.5 * g * (1.0 - gl);
}

}  // namespace

void SolverOptions::validate() const {
  require(eps > 0.0 && std::isfinite(eps), "solver options: eps must be positive");
  require(sigma_frac > 0.0 && sigma_frac < 1.0,
          "solver options: sigma_frac must lie in (0, 1)");
  require(zeta > 0.0 && std::isfinite(zeta),
          "solver options: zeta must be positive");
  require(eta_bar > 0.0 && eta_bar < 1.0,
          "solver options: eta_bar must lie in (0, 1)");
  require(rho > 0.0 && rho <= 1.0, "solver options: rho must lie in (0, 1]");
  require(nu > 0.0 && nu <= 1.0, "solver options: nu must lie in (0, 1]");
  require(max_outer >= 1, "solver options: max_outer must be at least 1");
  require(max_backtracks >= 1,
          "solver options: max_backtracks must be at least 1");
  require(cg_max_iters >= 0,
          "solver options: cg_max_iters must be nonnegative");
  require(lip_init > 0.0 && std::isfinite(lip_init),
          "solver options: lip_init must be positive");
}

Solution fbtn_solve(FbeProblem& problem, const Vector& x0,
                    const SolverOptions& opts) {
  opts.validate();
  check_dim(x0, problem.dim(), "fbtn solve");
  require(x0.allFinite(), "fbtn solve: x0 must be finite");

  const Index n = problem.dim();
  const int cg_cap = opts.cg_max_iters > 0 ? opts.cg_max_iters
                                           : static_cast<int>(2 * n);
  const auto t0 = Clock::now();

  Solution sol;
  FbePoint pt = problem.evaluate(x0);
  Vector d_prev = Vector::Zero(n);

  int k = 0;
  bool converged = false;
  while (k < opts.max_outer) {
    if (problem.adapt_gamma(pt)) d_prev.setZero();
    if (pt.residual.norm() <= opts.eps) {
      converged = true;
      break;
    }

    double gn = pt.fbe_grad.norm();
    double delta = opts.zeta * std::pow(gn, opts.nu);
    double eta = std::min(opts.eta_bar, std::pow(gn, opts.rho));
    double eps_inner = std::max(eta * gn, 1e-300);

    auto matvec = [&](const Vector& p) {
      return Vector(problem.hess_vec_fbe(pt, p) + delta * p);
    };
    CgOutcome cg = cg_solve(matvec, Vector(-pt.fbe_grad), eps_inner, d_prev,
                            cg_cap);

    if (cg.status == CgStatus::NegativeCurvature) {
      // curvature can only fail when the quadratic model overestimates the
      // stepsize window; shrink and redo this iteration
      problem.halve_gamma(pt);
      d_prev.setZero();
      continue;
    }

    double sigma = sufficient_decrease_sigma(problem, opts.sigma_frac);
    double res2 = pt.residual.squaredNorm();
    double tau = 1.0;
    bool accepted = false;
    FbePoint next;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      Vector cand = (1.0 - tau) * pt.tx + tau * (pt.x + cg.direction);
      next = problem.evaluate(cand);
      if (next.fbe <= pt.fbe - sigma * res2) {
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) {
      // the plain forward-backward step satisfies the decrease condition
      // once the Lipschitz estimate is right, so correct it and take that
      tau = 0.0;
      if (problem.adapt_gamma(pt)) d_prev.setZero();
      sigma = sufficient_decrease_sigma(problem, opts.sigma_frac);
      res2 = pt.residual.squaredNorm();
      next = problem.evaluate(pt.tx);
    }

    IterationRecord rec;
    rec.k = k;
    rec.fbe = pt.fbe;
    rec.res_norm = std::sqrt(res2);
    rec.tau = tau;
    rec.cg_iters = cg.iterations;
    rec.cg_status = cg.status;
    rec.delta = delta;
    rec.eps_inner = eps_inner;
    rec.gamma = problem.gamma();
    rec.hessvec_total = problem.counters().hess_vec;
    rec.prox_total = problem.counters().prox;
    rec.wall_ms = elapsed_ms(t0);
    sol.trace.push_back(rec);

    pt = next;
    d_prev = cg.direction;
    ++k;
  }

  sol.x = pt.x;
  sol.status = converged ? SolveStatus::ResidualBelowTol
                         : SolveStatus::MaxOuterIterations;
  sol.final_point = pt;
  sol.wall_ms_total = elapsed_ms(t0);
  return sol;
}

Solution fbs_solve(FbeProblem& problem, const Vector& x0, double relax,
                   double eps, int max_outer) {
  check_dim(x0, problem.dim(), "fbs solve");
  require(x0.allFinite(), "fbs solve: x0 must be finite");
  require(eps > 0.0 && std::isfinite(eps), "fbs solve: eps must be positive");
  require(max_outer >= 1, "fbs solve: max_outer must be at least 1");
  // the product gamma * L is invariant under the paired halving/doubling
  // updates, so this window stays valid for the whole run
  double gl = problem.gamma() * problem.lipschitz();
  require(relax > 0.0 && relax < 2.0 - 0.5 * gl,
          "fbs solve: relaxation must lie in (0, 2 - gamma L / 2)");

  const auto t0 = Clock::now();
  Solution sol;
  FbePoint pt = problem.evaluate(x0);

  int k = 0;
  bool converged = false;
  while (k < max_outer) {
    problem.adapt_gamma(pt);
    if (pt.residual.norm() <= eps) {
      converged = true;
      break;
    }

    IterationRecord rec;
    rec.k = k;
    rec.fbe = pt.fbe;
    rec.res_norm = pt.residual.norm();
    rec.tau = relax;
    rec.gamma = problem.gamma();

    Vector cand = pt.x - relax * problem.gamma() * pt.residual;
    pt = problem.evaluate(cand);

    rec.hessvec_total = problem.counters().hess_vec;
    rec.prox_total = problem.counters().prox;
    rec.wall_ms = elapsed_ms(t0);
    sol.trace.push_back(rec);
    ++k;
  }

  sol.x = pt.x;
  sol.status = converged ? SolveStatus::ResidualBelowTol
                         : SolveStatus::MaxOuterIterations;
  sol.final_point = pt;
  sol.wall_ms_total = elapsed_ms(t0);
  return sol;
}

}  // namespace fbtn
