#pragma once

#include <functional>

#include "fbtn/types.hpp"

namespace fbtn {

enum class CgStatus { Converged, MaxIterations, NegativeCurvature };

struct CgOutcome {
  Vector direction;
  CgStatus status = CgStatus::Converged;
  int iterations = 0;
  double final_residual_norm = 0.0;
};

// Conjugate gradient for M d = rhs with M symmetric positive definite,
// given only through its matvec.  Starts from warm_start with a true
// residual (one extra matvec) rather than trusting a stale one, stops when
// ||rhs - M d|| <= eps, and bails out with NegativeCurvature as soon as a
// search direction p sees curvature <p, M p> <= 1e-14 ||p||^2, returning
// the iterate accumulated so far.  On MaxIterations the iterate with the
// smallest residual norm seen is returned.
//
// observer, when set, is called with the current iterate after every
// accepted update (diagnostics only).
CgOutcome cg_solve(const std::function<Vector(const Vector&)>& matvec,
                   const Vector& rhs, double eps, const Vector& warm_start,
                   int max_iters,
                   const std::function<void(const Vector&)>& observer = {});

}  // namespace fbtn
