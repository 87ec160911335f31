#include "fbtn/cg.hpp"

#include <cmath>

namespace fbtn {

namespace {

void check_finite(const Vector& z) {
  if (!z.allFinite())
    throw std::runtime_error("cg: matvec produced non-finite values");
}

}  // namespace

CgOutcome cg_solve(const std::function<Vector(const Vector&)>& matvec,
                   const Vector& rhs, double eps, const Vector& warm_start,
                   int max_iters,
                   const std::function<void(const Vector&)>& observer) {
  require(static_cast<bool>(matvec), "cg: matvec must be callable");
  require(eps > 0.0, "cg: tolerance must be positive");
  require(max_iters >= 1, "cg: iteration cap must be at least 1");
  require(rhs.size() == warm_start.size(), "cg: dimension mismatch");

  CgOutcome out;
  out.direction = warm_start;

  Vector e = rhs - matvec(out.direction);
  check_finite(e);
  double rnorm = e.norm();

  Vector best = out.direction;
  double best_norm = rnorm;

  if (rnorm <= eps) {
    out.status = CgStatus::Converged;
    out.iterations = 0;
    out.final_residual_norm = rnorm;
    return out;
  }

  Vector p = e;
  double e2 = rnorm * rnorm;

  for (int it = 1; it <= max_iters; ++it) {
    Vector z = matvec(p);
    check_finite(z);
    double pz = p.dot(z);
    if (pz <= 1e-14 * p.squaredNorm()) {
      out.status = CgStatus::NegativeCurvature;
      out.iterations = it - 1;
      out.final_residual_norm = rnorm;
      return out;
    }
    double alpha = e2 / pz;
    out.direction += alpha * p;
    e -= alpha * z;
    rnorm = e.norm();
    if (observer) observer(out.direction);
    if (rnorm < best_norm) {
      best = out.direction;
      best_norm = rnorm;
    }
    if (rnorm <= eps) {
      out.status = CgStatus::Converged;
      out.iterations = it;
      out.final_residual_norm = rnorm;
      return out;
    }
    double e2_new = rnorm * rnorm;
    p = e + (e2_new / e2) * p;
    e2 = e2_new;
  }

  out.direction = best;
  out.status = CgStatus::MaxIterations;
  out.iterations = max_iters;
  out.final_residual_norm = best_norm;
  return out;
}

}  // namespace fbtn
