#pragma once

#include <memory>
#include <optional>

#include "fbtn/prox.hpp"
#include "fbtn/smooth.hpp"
#include "fbtn/types.hpp"

namespace fbtn {

struct OracleCounters {
  long value = 0;
  long gradient = 0;
  long hess_vec = 0;
  long prox = 0;
  long jac_vec = 0;
};

// Everything the solvers need at one iterate, computed in a single pass:
// smooth value and gradient, the forward (gradient) step, the backward
// (proximal) step, the fixed-point residual, the envelope value and its
// gradient.
struct FbePoint {
  Vector x;
  double fx = 0.0;
  Vector grad_fx;
  Vector forward;   // x - gamma * grad f(x)
  Vector tx;        // prox_{gamma g}(forward)
  double g_tx = 0.0;
  Vector residual;  // (x - tx) / gamma
  double fbe = 0.0;
  Vector fbe_grad;
};

// Couples a smooth term f and a nonsmooth term g with a stepsize gamma in
// (0, 1/L) and evaluates the forward-backward envelope
//   env(x) = f(x) + <grad f(x), T(x) - x> + ||T(x) - x||^2/(2 gamma) + g(T(x))
// together with its gradient and Hessian-vector products.  The envelope is
// real-valued and shares minimizers with f + g, which is what makes an
// unconstrained Newton-type method applicable to the composite problem.
class FbeProblem {
 public:
  // When f advertises no Lipschitz bound, lip_init seeds the adaptive
  // estimate.  An explicit gamma overrides the default 0.95/L and must
  // respect gamma < 1/L whenever a bound is known.
  FbeProblem(std::shared_ptr<const SmoothOracle> smooth,
             std::shared_ptr<const ProxOracle> nonsmooth,
             double lip_init = 1.0,
             std::optional<double> gamma_override = std::nullopt);

  Index dim() const { return smooth_->dim(); }
  double gamma() const { return gamma_; }
  double lipschitz() const { return lip_; }
  int gamma_halvings() const { return halvings_; }

  const SmoothOracle& smooth() const { return *smooth_; }
  const ProxOracle& nonsmooth() const { return *nonsmooth_; }

  const OracleCounters& counters() const { return counters_; }
  void reset_counters() { counters_ = {}; }

  FbePoint evaluate(const Vector& x) const;

  // Action of one generalized Hessian of the envelope at pt:
  //   (1/gamma) Q (I - P Q) p,  Q = I - gamma hess f(x),
  // with P the prox Jacobian selection at the forward point.
  Vector hess_vec_fbe(const FbePoint& pt, const Vector& p) const;

  // Halves gamma (doubling the Lipschitz estimate) until the quadratic
  // upper bound holds from pt.x to pt.tx, refreshing the dependent fields
  // of pt in place.  Returns true when gamma changed.  More than 60
  // halvings over the lifetime of the problem is treated as a defect in f.
  bool adapt_gamma(FbePoint& pt);

  // One unconditional halving, used when negative curvature shows up in an
  // inner solve; refreshes pt like adapt_gamma does.
  void halve_gamma(FbePoint& pt);

  // f(x) + g(x), possibly infinite
  ExtReal phi(const Vector& x) const;

 private:
  void refresh(FbePoint& pt) const;  // recompute forward..fbe_grad from x, fx, grad_fx
  void bump_halving();

  std::shared_ptr<const SmoothOracle> smooth_;
  std::shared_ptr<const ProxOracle> nonsmooth_;
  double gamma_ = 0.0;
  double lip_ = 0.0;
  int halvings_ = 0;
  mutable OracleCounters counters_;
};

}  // namespace fbtn
