#pragma once

#include <optional>
#include <vector>

#include "fbtn/cg.hpp"
#include "fbtn/fbe.hpp"
#include "fbtn/types.hpp"

namespace fbtn {

struct SolverOptions {
  double eps = 1e-8;          // stop when ||residual|| falls below this
  double sigma_frac = 0.5;    // fraction of gamma (1 - gamma L)/2 used in the descent test
  double zeta = 0.1;          // regularization scale delta = zeta ||grad env||^nu
  double eta_bar = 0.5;       // cap on the inner forcing ratio
  double rho = 1.0;           // forcing exponent eta = min(eta_bar, ||grad env||^rho)
  double nu = 1.0;            // regularization exponent
  int max_outer = 500;
  int max_backtracks = 50;
  int cg_max_iters = 0;       // 0 means 2 * dimension
  double lip_init = 1.0;      // seed for the Lipschitz estimate when f has none

  void validate() const;
};

struct IterationRecord {
  int k = 0;
  double fbe = 0.0;
  double res_norm = 0.0;
  double tau = 0.0;
  int cg_iters = 0;
  std::optional<CgStatus> cg_status;  // empty on rows produced without an inner solve
  double delta = 0.0;
  double eps_inner = 0.0;
  double gamma = 0.0;
  long hessvec_total = 0;
  long prox_total = 0;
  double wall_ms = 0.0;
};

enum class SolveStatus { ResidualBelowTol, MaxOuterIterations };

struct Solution {
  Vector x;
  SolveStatus status = SolveStatus::MaxOuterIterations;
  std::vector<IterationRecord> trace;
  FbePoint final_point;
  double wall_ms_total = 0.0;
};

// Truncated-Newton method on the forward-backward envelope.  Each outer
// iteration regularizes one generalized Hessian of the envelope, solves it
// inexactly with warm-started conjugate gradients, and globalizes the
// Newton direction by blending it with the plain forward-backward step:
// candidates (1 - tau) T(x) + tau (x + d) are tried for tau = 1, 1/2, ...
// until the envelope decreases by at least sigma ||residual||^2.  When the
// curvature guard trips inside CG the stepsize is halved and the iteration
// restarts; when every backtrack fails the iteration falls back to the
// plain forward-backward step, flagged in the trace with tau = 0.
Solution fbtn_solve(FbeProblem& problem, const Vector& x0,
                    const SolverOptions& opts);

// Relaxed forward-backward splitting x+ = (1 - relax) x + relax T(x),
// recorded with the same trace schema (tau holds the relaxation factor,
// inner-solve columns are zero).
Solution fbs_solve(FbeProblem& problem, const Vector& x0, double relax,
                   double eps, int max_outer);

}  // namespace fbtn
