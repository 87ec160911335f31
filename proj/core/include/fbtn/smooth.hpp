#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "fbtn/types.hpp"

namespace fbtn {

// Convex, twice-differentiable term f with Lipschitz gradient, exposed
// through value/gradient/Hessian-vector products only.  Hessians are never
// materialized; solvers interact with curvature purely through hess_vec.
class SmoothOracle {
 public:
  virtual ~SmoothOracle() = default;

  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual Vector hess_vec(const Vector& x, const Vector& p) const = 0;

  // Upper bound on the gradient Lipschitz constant when cheaply available,
  // nullopt otherwise (callers then fall back to an adaptive estimate).
  virtual std::optional<double> lipschitz_estimate() const {
    return std::nullopt;
  }
};

// f(x) = (1/2) <x, H x> + <h, x> with H symmetric positive semidefinite.
// The constructor symmetrizes H, so mildly asymmetric inputs are accepted.
class QuadraticSmooth : public SmoothOracle {
 public:
  QuadraticSmooth(Matrix H, Vector h);

  Index dim() const override { return h_.size(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& p) const override;
  std::optional<double> lipschitz_estimate() const override;

  const Matrix& hessian() const { return H_; }

 private:
  Matrix H_;
  Vector h_;
};

// f(x) = (1/2) ||A x - b||^2
class LeastSquaresSmooth : public SmoothOracle {
 public:
  LeastSquaresSmooth(Matrix A, Vector b);

  Index dim() const override { return A_.cols(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& p) const override;
  std::optional<double> lipschitz_estimate() const override;

  const Matrix& matrix() const { return A_; }
  const Vector& rhs() const { return b_; }

 private:
  Matrix A_;
  Vector b_;
};

// Logistic loss f(x) = sum_i log(1 + exp(-y_i <a_i, x>)), labels y_i in {-1,+1}.
// No cheap Lipschitz bound is advertised; callers rely on backtracking.
class LogisticSmooth : public SmoothOracle {
 public:
  LogisticSmooth(Matrix A, Vector y);

  Index dim() const override { return A_.cols(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& p) const override;

 private:
  Matrix A_;
  Vector y_;
};

// f identically zero; running the forward-backward machinery with this
// oracle reduces it to the proximal point algorithm.
class ZeroSmooth : public SmoothOracle {
 public:
  explicit ZeroSmooth(Index n);

  Index dim() const override { return n_; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& p) const override;
  std::optional<double> lipschitz_estimate() const override { return 0.0; }

 private:
  Index n_;
};

// Largest eigenvalue of a symmetric PSD operator given as a matvec, by
// power iteration from a fixed seeded start vector.  Capped at max_iters
// sweeps or a relative change below rel_tol, whichever comes first.
double power_iteration_max_eig(
    const std::function<Vector(const Vector&)>& matvec, Index n,
    int max_iters = 100, double rel_tol = 1e-6);

}  // namespace fbtn
