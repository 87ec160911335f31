#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "fbtn/types.hpp"

namespace fbtn {

// Result of a proximal step: the minimizer z of g(w) + ||w - x||^2 / (2 gamma)
// together with g(z), which is always finite (indicator instances return a
// feasible point and 0).
struct ProxResult {
  Vector point;
  double value = 0.0;
};

// Proper closed convex term g accessed through its value, proximal mapping
// and a deterministic selection from the Clarke Jacobian of the prox.
// jac_vec(x, gamma, v) applies one fixed element P of the generalized
// Jacobian of prox_{gamma g} at x; every selection here is symmetric with
// eigenvalues in [0, 1], and ties at nondifferentiable points are broken by
// a documented rule per instance.
class ProxOracle {
 public:
  virtual ~ProxOracle() = default;

  virtual Index dim() const = 0;
  virtual ExtReal value(const Vector& z) const = 0;
  virtual ProxResult prox(const Vector& x, double gamma) const = 0;
  virtual Vector jac_vec(const Vector& x, double gamma,
                         const Vector& v) const = 0;
};

// g(z) = weight * ||z||_1, prox is coordinatewise soft thresholding.
// Jacobian selection: diagonal with 1 where |x_i| strictly exceeds the
// threshold, 0 otherwise (ties select 0).
class L1Norm : public ProxOracle {
 public:
  L1Norm(Index n, double weight);

  Index dim() const override { return n_; }
  ExtReal value(const Vector& z) const override;
  ProxResult prox(const Vector& x, double gamma) const override;
  Vector jac_vec(const Vector& x, double gamma, const Vector& v) const override;

  double weight() const { return weight_; }

 private:
  Index n_;
  double weight_;
};

// Indicator of the box {l <= z <= u}; bounds may be -inf/+inf entrywise.
// Jacobian selection: 1 strictly inside the interval, 0 at and outside the
// bounds.
class SeparableBox : public ProxOracle {
 public:
  SeparableBox(Vector lower, Vector upper);

  Index dim() const override { return lower_.size(); }
  ExtReal value(const Vector& z) const override;
  ProxResult prox(const Vector& x, double gamma) const override;
  Vector jac_vec(const Vector& x, double gamma, const Vector& v) const override;

  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

 private:
  Vector lower_, upper_;
};

// Indicator of {z : A z = b}.  The pseudoinverse is held as a rank-revealing
// orthogonal decomposition computed once at construction; an inconsistent b
// (empty set) is rejected there.
class AffineSet : public ProxOracle {
 public:
  AffineSet(Matrix A, Vector b);
  ~AffineSet() override;

  Index dim() const override;
  ExtReal value(const Vector& z) const override;
  ProxResult prox(const Vector& x, double gamma) const override;
  Vector jac_vec(const Vector& x, double gamma, const Vector& v) const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Indicator of {z : <a, z> <= beta}, a != 0.
class Halfspace : public ProxOracle {
 public:
  Halfspace(Vector a, double beta);

  Index dim() const override { return a_.size(); }
  ExtReal value(const Vector& z) const override;
  ProxResult prox(const Vector& x, double gamma) const override;
  Vector jac_vec(const Vector& x, double gamma, const Vector& v) const override;

  const Vector& normal() const { return a_; }
  double offset() const { return beta_; }

 private:
  Vector a_;
  double beta_;
  double norm2_;
};

// Indicator of the probability simplex {z >= 0, sum z = 1}; projection by
// the sort-and-threshold rule.
class UnitSimplex : public ProxOracle {
 public:
  explicit UnitSimplex(Index n);

  Index dim() const override { return n_; }
  ExtReal value(const Vector& z) const override;
  ProxResult prox(const Vector& x, double gamma) const override;
  Vector jac_vec(const Vector& x, double gamma, const Vector& v) const override;

 private:
  Index n_;
};

// Indicator of the closed unit Euclidean ball.  Jacobian selection at
// ||x|| = 1 is the identity.
class EuclideanBall : public ProxOracle {
 public:
  explicit EuclideanBall(Index n);

  Index dim() const override { return n_; }
  ExtReal value(const Vector& z) const override;
  ProxResult prox(const Vector& x, double gamma) const override;
  Vector jac_vec(const Vector& x, double gamma, const Vector& v) const override;

 private:
  Index n_;
};

// g(z) = weight * ||z||_2 (block soft thresholding in one block).
// Jacobian selection at ||x|| = gamma * weight is the zero matrix.
class EuclideanNorm : public ProxOracle {
 public:
  EuclideanNorm(Index n, double weight);

  Index dim() const override { return n_; }
  ExtReal value(const Vector& z) const override;
  ProxResult prox(const Vector& x, double gamma) const override;
  Vector jac_vec(const Vector& x, double gamma, const Vector& v) const override;

  double weight() const { return weight_; }

 private:
  Index n_;
  double weight_;
};

// g(z) = weight * sum_s ||z_s||_2 over a partition of the coordinates.
class GroupNorms : public ProxOracle {
 public:
  GroupNorms(Index n, std::vector<std::vector<Index>> groups, double weight);

  Index dim() const override { return n_; }
  ExtReal value(const Vector& z) const override;
  ProxResult prox(const Vector& x, double gamma) const override;
  Vector jac_vec(const Vector& x, double gamma, const Vector& v) const override;

  const std::vector<std::vector<Index>>& groups() const { return groups_; }
  double weight() const { return weight_; }

 private:
  Index n_;
  std::vector<std::vector<Index>> groups_;
  double weight_;
};

// g(z) = weight * ||z||_inf, evaluated through the l1-ball projection of
// the scaled point (sign-split simplex projection).
class LInfNorm : public ProxOracle {
 public:
  LInfNorm(Index n, double weight);

  Index dim() const override { return n_; }
  ExtReal value(const Vector& z) const override;
  ProxResult prox(const Vector& x, double gamma) const override;
  Vector jac_vec(const Vector& x, double gamma, const Vector& v) const override;

  double weight() const { return weight_; }

 private:
  Index n_;
  double weight_;
};

// Indicator of the second-order cone {(z0, zbar) : ||zbar|| <= z0}, n >= 2.
// Boundary Jacobian selections: identity on the cone surface away from the
// origin, zero on the polar surface and at the origin.
class SecondOrderCone : public ProxOracle {
 public:
  explicit SecondOrderCone(Index n);

  Index dim() const override { return n_; }
  ExtReal value(const Vector& z) const override;
  ProxResult prox(const Vector& x, double gamma) const override;
  Vector jac_vec(const Vector& x, double gamma, const Vector& v) const override;

 private:
  Index n_;
};

// Indicator of {z : ||z||_1 <= radius}.
class L1Ball : public ProxOracle {
 public:
  L1Ball(Index n, double radius);

  Index dim() const override { return n_; }
  ExtReal value(const Vector& z) const override;
  ProxResult prox(const Vector& x, double gamma) const override;
  Vector jac_vec(const Vector& x, double gamma, const Vector& v) const override;

  double radius() const { return radius_; }

 private:
  Index n_;
  double radius_;
};

// g identically zero: prox is the identity.
class ZeroProx : public ProxOracle {
 public:
  explicit ZeroProx(Index n);

  Index dim() const override { return n_; }
  ExtReal value(const Vector& z) const override;
  ProxResult prox(const Vector& x, double gamma) const override;
  Vector jac_vec(const Vector& x, double gamma, const Vector& v) const override;

 private:
  Index n_;
};

// Sum of independent terms acting on disjoint index blocks that must cover
// every coordinate exactly once.
class SeparableSum : public ProxOracle {
 public:
  struct Part {
    std::shared_ptr<const ProxOracle> oracle;
    std::vector<Index> indices;
  };

  SeparableSum(Index n, std::vector<Part> parts);

  Index dim() const override { return n_; }
  ExtReal value(const Vector& z) const override;
  ProxResult prox(const Vector& x, double gamma) const override;
  Vector jac_vec(const Vector& x, double gamma, const Vector& v) const override;

  const std::vector<Part>& parts() const { return parts_; }

 private:
  Index n_;
  std::vector<Part> parts_;
};

// Convex conjugate of an inner term h, with prox and Jacobian obtained from
// the inner oracle through the Moreau decomposition
//   prox_{gamma h*}(x) = x - gamma prox_{h/gamma}(x/gamma).
// The conjugate's value is supplied by a callback; for a known inner oracle
// (simplex, box, Euclidean ball, l1 ball) a closed form is filled in
// automatically and the callback may be omitted.
class MoreauConjugate : public ProxOracle {
 public:
  using ValueFn = std::function<ExtReal(const Vector&)>;

  explicit MoreauConjugate(std::shared_ptr<const ProxOracle> inner,
                           ValueFn value_fn = {});

  Index dim() const override { return inner_->dim(); }
  ExtReal value(const Vector& z) const override;
  ProxResult prox(const Vector& x, double gamma) const override;
  Vector jac_vec(const Vector& x, double gamma, const Vector& v) const override;

  const ProxOracle& inner() const { return *inner_; }

 private:
  std::shared_ptr<const ProxOracle> inner_;
  ValueFn value_fn_;
};

// Projection of y onto {p >= 0, sum p = s}, s > 0, by sorting and
// thresholding: p_i = max(y_i - t, 0) with t chosen so the sum is s.
struct SimplexProjection {
  Vector point;
  double threshold;
};
SimplexProjection project_to_simplex(const Vector& y, double s);

}  // namespace fbtn
