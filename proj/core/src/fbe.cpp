#include "fbtn/fbe.hpp"

#include <cmath>

namespace fbtn {

FbeProblem::FbeProblem(std::shared_ptr<const SmoothOracle> smooth,
                       std::shared_ptr<const ProxOracle> nonsmooth,
                       double lip_init,
                       std::optional<double> gamma_override)
    : smooth_(std::move(smooth)), nonsmooth_(std::move(nonsmooth)) {
  require(smooth_ != nullptr, "fbe problem: null smooth oracle");
  require(nonsmooth_ != nullptr, "fbe problem: null nonsmooth oracle");
  require(smooth_->dim() == nonsmooth_->dim(),
          "fbe problem: oracle dimensions disagree");
  require(lip_init > 0.0 && std::isfinite(lip_init),
          "fbe problem: lip_init must be positive and finite");

  std::optional<double> est = smooth_->lipschitz_estimate();
  if (est.has_value()) {
    require(*est >= 0.0 && std::isfinite(*est),
            "fbe problem: oracle returned an invalid Lipschitz bound");
    lip_ = *est;
  } else {
    lip_ = lip_init;
  }

  if (gamma_override.has_value()) {
    double g = *gamma_override;
    require(g > 0.0 && std::isfinite(g), "fbe problem: gamma must be positive");
    if (lip_ > 0.0 && est.has_value())
      require(g < 1.0 / lip_, "fbe problem: gamma must be below 1/L");
    if (!est.has_value() && g >= 0.95 / lip_) {
      // no trusted bound; fold the requested stepsize into the guess so the
      // invariant gamma < 1/L holds from the start
      lip_ = 0.95 / g;
    }
    gamma_ = g;
  } else {
    gamma_ = lip_ > 0.0 ? 0.95 / lip_ : 0.95 / lip_init;
  }
}

FbePoint FbeProblem::evaluate(const Vector& x) const {
  check_dim(x, dim(), "fbe evaluate");
  FbePoint pt;
  pt.x = x;
  pt.fx = smooth_->value(x);
  ++counters_.value;
  pt.grad_fx = smooth_->gradient(x);
  ++counters_.gradient;
  refresh(pt);
  return pt;
}

void FbeProblem::refresh(FbePoint& pt) const {
  pt.forward = pt.x - gamma_ * pt.grad_fx;
  ProxResult pr = nonsmooth_->prox(pt.forward, gamma_);
  ++counters_.prox;
  pt.tx = pr.point;
  pt.g_tx = pr.value;
  Vector diff = pt.tx - pt.x;
  pt.residual = -diff / gamma_;
  // envelope evaluated at its inner minimizer tx, which keeps the value
  // exact even while the Lipschitz estimate is still being adapted
  pt.fbe = pt.fx + pt.grad_fx.dot(diff) + diff.squaredNorm() / (2.0 * gamma_) +
           pt.g_tx;
  pt.fbe_grad = pt.residual - gamma_ * smooth_->hess_vec(pt.x, pt.residual);
  ++counters_.hess_vec;
}

Vector FbeProblem::hess_vec_fbe(const FbePoint& pt, const Vector& p) const {
  check_dim(p, dim(), "fbe hess_vec direction");
  Vector u = smooth_->hess_vec(pt.x, p);
  ++counters_.hess_vec;
  Vector qp = p - gamma_ * u;
  Vector w = p - nonsmooth_->jac_vec(pt.forward, gamma_, qp);
  ++counters_.jac_vec;
  Vector qw = w - gamma_ * smooth_->hess_vec(pt.x, w);
  ++counters_.hess_vec;
  return qw / gamma_;
}

bool FbeProblem::adapt_gamma(FbePoint& pt) {
  bool changed = false;
  for (;;) {
    double ftx = smooth_->value(pt.tx);
    ++counters_.value;
    Vector diff = pt.tx - pt.x;
    double bound = pt.fx + pt.grad_fx.dot(diff) +
                   0.5 * lip_ * diff.squaredNorm() +
                   1e-12 * (1.0 + std::abs(pt.fx));
    if (ftx <= bound) break;
    bump_halving();
    gamma_ *= 0.5;
    lip_ *= 2.0;
    refresh(pt);
    changed = true;
  }
  return changed;
}

void FbeProblem::halve_gamma(FbePoint& pt) {
  bump_halving();
  gamma_ *= 0.5;
  lip_ *= 2.0;
  refresh(pt);
}

void FbeProblem::bump_halving() {
  if (++halvings_ > 60)
    throw std::runtime_error(
        "fbe problem: stepsize halved more than 60 times; f appears to "
        "violate its smoothness/convexity contract");
}

ExtReal FbeProblem::phi(const Vector& x) const {
  check_dim(x, dim(), "phi");
  double fx = smooth_->value(x);
  ++counters_.value;
  return nonsmooth_->value(x) + fx;
}

}  // namespace fbtn
