#include "fbtn/prox.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace fbtn {

namespace {

// absolute tolerances for feasibility checks and for deciding which
// constraints are active at a projected point
constexpr double kFeasTol = 1e-12;
constexpr double kActiveTol = 1e-12;

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("prox: step gamma must be positive and finite");
}

double sgn(double t) { return t < 0.0 ? -1.0 : 1.0; }

}  // namespace

SimplexProjection project_to_simplex(const Vector& y, double s) {
  require(s > 0.0, "simplex projection: target sum must be positive");
  const Index n = y.size();
  std::vector<double> sorted(y.data(), y.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumsum = 0.0;
  double t = 0.0;
  for (Index k = 0; k < n; ++k) {
    cumsum += sorted[k];
    double cand = (cumsum - s) / static_cast<double>(k + 1);
    if (k + 1 < n && sorted[k + 1] >= cand) continue;
    t = cand;
    break;
  }
  SimplexProjection out;
  out.threshold = t;
  out.point = (y.array() - t).max(0.0).matrix();
  return out;
}

// ---------------------------------------------------------------------------
// L1Norm

L1Norm::L1Norm(Index n, double weight) : n_(n), weight_(weight) {
  require(n > 0, "l1 norm: dimension must be positive");
  require(weight >= 0.0, "l1 norm: weight must be nonnegative");
}

ExtReal L1Norm::value(const Vector& z) const {
  check_dim(z, n_, "l1 value");
  return ExtReal::finite(weight_ * z.lpNorm<1>());
}

ProxResult L1Norm::prox(const Vector& x, double gamma) const {
  check_dim(x, n_, "l1 prox");
  check_gamma(gamma);
  const double t = gamma * weight_;
  ProxResult r;
  r.point = x.unaryExpr([t](double xi) {
    double m = std::abs(xi) - t;
    return m > 0.0 ? sgn(xi) * m : 0.0;
  });
  r.value = weight_ * r.point.lpNorm<1>();
  return r;
}

Vector L1Norm::jac_vec(const Vector& x, double gamma, const Vector& v) const {
  check_dim(x, n_, "l1 jac");
  check_dim(v, n_, "l1 jac direction");
  check_gamma(gamma);
  const double t = gamma * weight_;
  Vector out(n_);
  for (Index i = 0; i < n_; ++i) out[i] = std::abs(x[i]) > t ? v[i] : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// SeparableBox

SeparableBox::SeparableBox(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  require(lower_.size() == upper_.size(), "box: bound dimensions disagree");
  require(lower_.size() > 0, "box: dimension must be positive");
  for (Index i = 0; i < lower_.size(); ++i) {
    require(!std::isnan(lower_[i]) && !std::isnan(upper_[i]), "box: NaN bound");
    require(lower_[i] <= upper_[i], "box: lower bound exceeds upper bound");
  }
}

ExtReal SeparableBox::value(const Vector& z) const {
  check_dim(z, dim(), "box value");
  for (Index i = 0; i < z.size(); ++i)
    if (z[i] < lower_[i] - kFeasTol || z[i] > upper_[i] + kFeasTol)
      return ExtReal::infinity();
  return ExtReal::finite(0.0);
}

ProxResult SeparableBox::prox(const Vector& x, double gamma) const {
  check_dim(x, dim(), "box prox");
  check_gamma(gamma);
  ProxResult r;
  r.point = x.cwiseMax(lower_).cwiseMin(upper_);
  r.value = 0.0;
  return r;
}

Vector SeparableBox::jac_vec(const Vector& x, double gamma,
                             const Vector& v) const {
  check_dim(x, dim(), "box jac");
  check_dim(v, dim(), "box jac direction");
  check_gamma(gamma);
  Vector out(dim());
  for (Index i = 0; i < dim(); ++i)
    out[i] = (x[i] > lower_[i] && x[i] < upper_[i]) ? v[i] : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// AffineSet

struct AffineSet::Impl {
  Matrix A;
  Vector b;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
};

AffineSet::AffineSet(Matrix A, Vector b) : impl_(new Impl) {
  require(A.rows() == b.size(), "affine set: A and b dimensions disagree");
  require(A.cols() > 0, "affine set: empty A");
  impl_->A = std::move(A);
  impl_->b = std::move(b);
  Eigen::MatrixXd dense = impl_->A;
  impl_->cod.setThreshold(1e-10);
  impl_->cod.compute(dense);
  // reject an empty feasible set up front: b must lie in the range of A
  Vector probe = impl_->cod.solve(impl_->b);
  double resid = (impl_->A * probe - impl_->b).lpNorm<Eigen::Infinity>();
  require(resid <= 1e-8 * (1.0 + impl_->b.lpNorm<Eigen::Infinity>()),
          "affine set: b is not in the range of A (empty set)");
}

AffineSet::~AffineSet() = default;

Index AffineSet::dim() const { return impl_->A.cols(); }

ExtReal AffineSet::value(const Vector& z) const {
  check_dim(z, dim(), "affine value");
  double resid = (impl_->A * z - impl_->b).lpNorm<Eigen::Infinity>();
  return resid <= kFeasTol ? ExtReal::finite(0.0) : ExtReal::infinity();
}

ProxResult AffineSet::prox(const Vector& x, double gamma) const {
  check_dim(x, dim(), "affine prox");
  check_gamma(gamma);
  ProxResult r;
  Vector corr = impl_->cod.solve(impl_->A * x - impl_->b);
  r.point = x - corr;
  r.value = 0.0;
  return r;
}

Vector AffineSet::jac_vec(const Vector& x, double gamma,
                          const Vector& v) const {
  check_dim(x, dim(), "affine jac");
  check_dim(v, dim(), "affine jac direction");
  check_gamma(gamma);
  return v - impl_->cod.solve(impl_->A * v);
}

// ---------------------------------------------------------------------------
// Halfspace

Halfspace::Halfspace(Vector a, double beta) : a_(std::move(a)), beta_(beta) {
  require(a_.size() > 0, "halfspace: dimension must be positive");
  norm2_ = a_.squaredNorm();
  require(norm2_ > 0.0, "halfspace: normal vector must be nonzero");
}

ExtReal Halfspace::value(const Vector& z) const {
  check_dim(z, dim(), "halfspace value");
  return a_.dot(z) <= beta_ + kFeasTol ? ExtReal::finite(0.0)
                                       : ExtReal::infinity();
}

ProxResult Halfspace::prox(const Vector& x, double gamma) const {
  check_dim(x, dim(), "halfspace prox");
  check_gamma(gamma);
  ProxResult r;
  double excess = a_.dot(x) - beta_;
  r.point = excess > 0.0 ? Vector(x - (excess / norm2_) * a_) : x;
  r.value = 0.0;
  return r;
}

Vector Halfspace::jac_vec(const Vector& x, double gamma,
                          const Vector& v) const {
  check_dim(x, dim(), "halfspace jac");
  check_dim(v, dim(), "halfspace jac direction");
  check_gamma(gamma);
  // active when the projected point sits on the boundary; at an exact tie
  // the tangential projection is selected
  if (a_.dot(x) - beta_ < -kActiveTol) return v;
  return v - (a_.dot(v) / norm2_) * a_;
}

// ---------------------------------------------------------------------------
// UnitSimplex

UnitSimplex::UnitSimplex(Index n) : n_(n) {
  require(n > 0, "simplex: dimension must be positive");
}

ExtReal UnitSimplex::value(const Vector& z) const {
  check_dim(z, n_, "simplex value");
  if (std::abs(z.sum() - 1.0) > kFeasTol) return ExtReal::infinity();
  for (Index i = 0; i < n_; ++i)
    if (z[i] < -kFeasTol) return ExtReal::infinity();
  return ExtReal::finite(0.0);
}

ProxResult UnitSimplex::prox(const Vector& x, double gamma) const {
  check_dim(x, n_, "simplex prox");
  check_gamma(gamma);
  ProxResult r;
  r.point = project_to_simplex(x, 1.0).point;
  r.value = 0.0;
  return r;
}

Vector UnitSimplex::jac_vec(const Vector& x, double gamma,
                            const Vector& v) const {
  check_dim(x, n_, "simplex jac");
  check_dim(v, n_, "simplex jac direction");
  check_gamma(gamma);
  Vector z = project_to_simplex(x, 1.0).point;
  // free coordinates are the strictly positive ones of the projection
  Index m = 0;
  double vsum = 0.0;
  for (Index i = 0; i < n_; ++i) {
    if (z[i] > kActiveTol) {
      ++m;
      vsum += v[i];
    }
  }
  if (m == 0) return Vector::Zero(n_);  // unreachable: the sum is 1
  Vector out = Vector::Zero(n_);
  double shift = vsum / static_cast<double>(m);
  for (Index i = 0; i < n_; ++i)
    if (z[i] > kActiveTol) out[i] = v[i] - shift;
  return out;
}

// ---------------------------------------------------------------------------
// EuclideanBall

EuclideanBall::EuclideanBall(Index n) : n_(n) {
  require(n > 0, "ball: dimension must be positive");
}

ExtReal EuclideanBall::value(const Vector& z) const {
  check_dim(z, n_, "ball value");
  return z.norm() <= 1.0 + kFeasTol ? ExtReal::finite(0.0)
                                    : ExtReal::infinity();
}

ProxResult EuclideanBall::prox(const Vector& x, double gamma) const {
  check_dim(x, n_, "ball prox");
  check_gamma(gamma);
  ProxResult r;
  double nx = x.norm();
  r.point = nx <= 1.0 ? x : Vector(x / nx);
  r.value = 0.0;
  return r;
}

Vector EuclideanBall::jac_vec(const Vector& x, double gamma,
                              const Vector& v) const {
  check_dim(x, n_, "ball jac");
  check_dim(v, n_, "ball jac direction");
  check_gamma(gamma);
  double nx = x.norm();
  if (nx <= 1.0) return v;  // includes the tie on the sphere
  Vector w = x / nx;
  return (v - w.dot(v) * w) / nx;
}

// ---------------------------------------------------------------------------
// EuclideanNorm

EuclideanNorm::EuclideanNorm(Index n, double weight) : n_(n), weight_(weight) {
  require(n > 0, "euclidean norm: dimension must be positive");
  require(weight >= 0.0, "euclidean norm: weight must be nonnegative");
}

ExtReal EuclideanNorm::value(const Vector& z) const {
  check_dim(z, n_, "euclidean norm value");
  return ExtReal::finite(weight_ * z.norm());
}

ProxResult EuclideanNorm::prox(const Vector& x, double gamma) const {
  check_dim(x, n_, "euclidean norm prox");
  check_gamma(gamma);
  const double t = gamma * weight_;
  ProxResult r;
  double nx = x.norm();
  if (nx > t) {
    r.point = (1.0 - t / nx) * x;
    r.value = weight_ * r.point.norm();
  } else {
    r.point = Vector::Zero(n_);
    r.value = 0.0;
  }
  return r;
}

Vector EuclideanNorm::jac_vec(const Vector& x, double gamma,
                              const Vector& v) const {
  check_dim(x, n_, "euclidean norm jac");
  check_dim(v, n_, "euclidean norm jac direction");
  check_gamma(gamma);
  const double t = gamma * weight_;
  if (t == 0.0) return v;
  double nx = x.norm();
  if (nx <= t) return Vector::Zero(n_);  // includes the tie at the threshold
  Vector w = x / nx;
  return v - (t / nx) * (v - w.dot(v) * w);
}

// ---------------------------------------------------------------------------
// GroupNorms

GroupNorms::GroupNorms(Index n, std::vector<std::vector<Index>> groups,
                       double weight)
    : n_(n), groups_(std::move(groups)), weight_(weight) {
  require(n > 0, "group norms: dimension must be positive");
  require(weight >= 0.0, "group norms: weight must be nonnegative");
  std::vector<char> seen(static_cast<size_t>(n), 0);
  for (const auto& g : groups_) {
    require(!g.empty(), "group norms: empty group");
    for (Index i : g) {
      require(i >= 0 && i < n, "group norms: index out of range");
      require(!seen[static_cast<size_t>(i)],
              "group norms: groups must be disjoint");
      seen[static_cast<size_t>(i)] = 1;
    }
  }
  for (char c : seen)
    require(c, "group norms: groups must cover every coordinate");
}

ExtReal GroupNorms::value(const Vector& z) const {
  check_dim(z, n_, "group norms value");
  double s = 0.0;
  for (const auto& g : groups_) {
    double q = 0.0;
    for (Index i : g) q += z[i] * z[i];
    s += std::sqrt(q);
  }
  return ExtReal::finite(weight_ * s);
}

ProxResult GroupNorms::prox(const Vector& x, double gamma) const {
  check_dim(x, n_, "group norms prox");
  check_gamma(gamma);
  const double t = gamma * weight_;
  ProxResult r;
  r.point = Vector::Zero(n_);
  double total = 0.0;
  for (const auto& g : groups_) {
    double q = 0.0;
    for (Index i : g) q += x[i] * x[i];
    double nx = std::sqrt(q);
    if (nx > t) {
      double scale = 1.0 - t / nx;
      for (Index i : g) r.point[i] = scale * x[i];
      total += scale * nx;
    }
  }
  r.value = weight_ * total;
  return r;
}

Vector GroupNorms::jac_vec(const Vector& x, double gamma,
                           const Vector& v) const {
  check_dim(x, n_, "group norms jac");
  check_dim(v, n_, "group norms jac direction");
  check_gamma(gamma);
  const double t = gamma * weight_;
  Vector out = Vector::Zero(n_);
  for (const auto& g : groups_) {
    if (t == 0.0) {
      for (Index i : g) out[i] = v[i];
      continue;
    }
    double q = 0.0;
    for (Index i : g) q += x[i] * x[i];
    double nx = std::sqrt(q);
    if (nx <= t) continue;  // block at or below threshold maps to zero
    double wv = 0.0;
    for (Index i : g) wv += (x[i] / nx) * v[i];
    for (Index i : g)
      out[i] = v[i] - (t / nx) * (v[i] - wv * (x[i] / nx));
  }
  return out;
}

// ---------------------------------------------------------------------------
// LInfNorm

LInfNorm::LInfNorm(Index n, double weight) : n_(n), weight_(weight) {
  require(n > 0, "linf norm: dimension must be positive");
  require(weight >= 0.0, "linf norm: weight must be nonnegative");
}

ExtReal LInfNorm::value(const Vector& z) const {
  check_dim(z, n_, "linf value");
  return ExtReal::finite(weight_ * z.lpNorm<Eigen::Infinity>());
}

ProxResult LInfNorm::prox(const Vector& x, double gamma) const {
  check_dim(x, n_, "linf prox");
  check_gamma(gamma);
  ProxResult r;
  if (weight_ == 0.0) {
    r.point = x;
    r.value = 0.0;
    return r;
  }
  // Moreau route: subtract the projection of x onto the l1 ball of radius
  // gamma * weight, computed by a sign-split simplex projection
  if (x.lpNorm<1>() <= gamma * weight_) {
    r.point = Vector::Zero(n_);
    r.value = 0.0;
    return r;
  }
  SimplexProjection sp = project_to_simplex(x.cwiseAbs(), gamma * weight_);
  r.point = Vector(n_);
  for (Index i = 0; i < n_; ++i) r.point[i] = x[i] - sgn(x[i]) * sp.point[i];
  r.value = weight_ * r.point.lpNorm<Eigen::Infinity>();
  return r;
}

Vector LInfNorm::jac_vec(const Vector& x, double gamma, const Vector& v) const {
  check_dim(x, n_, "linf jac");
  check_dim(v, n_, "linf jac direction");
  check_gamma(gamma);
  if (weight_ == 0.0) return v;
  if (x.lpNorm<1>() <= gamma * weight_) return Vector::Zero(n_);
  SimplexProjection sp = project_to_simplex(x.cwiseAbs(), gamma * weight_);
  // clipped coordinates share a common magnitude; their block averages the
  // sign-adjusted direction, unclipped coordinates pass through
  Index m = 0;
  double acc = 0.0;
  for (Index i = 0; i < n_; ++i) {
    if (sp.point[i] > kActiveTol) {
      ++m;
      acc += sgn(x[i]) * v[i];
    }
  }
  if (m == 0) return v;  // vanishing radius, the map degenerates to identity
  Vector out(n_);
  double avg = acc / static_cast<double>(m);
  for (Index i = 0; i < n_; ++i)
    out[i] = sp.point[i] > kActiveTol ? sgn(x[i]) * avg : v[i];
  return out;
}

// ---------------------------------------------------------------------------
// SecondOrderCone

SecondOrderCone::SecondOrderCone(Index n) : n_(n) {
  require(n >= 2, "second-order cone: dimension must be at least 2");
}

ExtReal SecondOrderCone::value(const Vector& z) const {
  check_dim(z, n_, "soc value");
  double nbar = z.tail(n_ - 1).norm();
  return nbar <= z[0] + kFeasTol ? ExtReal::finite(0.0) : ExtReal::infinity();
}

ProxResult SecondOrderCone::prox(const Vector& x, double gamma) const {
  check_dim(x, n_, "soc prox");
  check_gamma(gamma);
  ProxResult r;
  double x0 = x[0];
  double nbar = x.tail(n_ - 1).norm();
  if (nbar <= x0) {
    r.point = x;
  } else if (nbar <= -x0) {
    r.point = Vector::Zero(n_);
  } else {
    double c = 0.5 * (x0 + nbar);
    r.point = Vector(n_);
    r.point[0] = c;
    r.point.tail(n_ - 1) = (c / nbar) * x.tail(n_ - 1);
  }
  r.value = 0.0;
  return r;
}

Vector SecondOrderCone::jac_vec(const Vector& x, double gamma,
                                const Vector& v) const {
  check_dim(x, n_, "soc jac");
  check_dim(v, n_, "soc jac direction");
  check_gamma(gamma);
  double x0 = x[0];
  double nbar = x.tail(n_ - 1).norm();
  if (x0 == 0.0 && nbar == 0.0) return Vector::Zero(n_);
  if (nbar <= x0) return v;
  if (nbar <= -x0) return Vector::Zero(n_);
  // interpolating case: (1/2) [[1, w^T], [w, (1-a) I + a w w^T]] with
  // w = xbar/||xbar||, a = -x0/||xbar||
  Vector w = x.tail(n_ - 1) / nbar;
  double a = -x0 / nbar;
  double v0 = v[0];
  double wv = w.dot(v.tail(n_ - 1));
  Vector out(n_);
  out[0] = 0.5 * (v0 + wv);
  out.tail(n_ - 1) =
      0.5 * (v0 * w + (1.0 - a) * v.tail(n_ - 1) + a * wv * w);
  return out;
}

// ---------------------------------------------------------------------------
// L1Ball

L1Ball::L1Ball(Index n, double radius) : n_(n), radius_(radius) {
  require(n > 0, "l1 ball: dimension must be positive");
  require(radius > 0.0, "l1 ball: radius must be positive");
}

ExtReal L1Ball::value(const Vector& z) const {
  check_dim(z, n_, "l1 ball value");
  return z.lpNorm<1>() <= radius_ + kFeasTol ? ExtReal::finite(0.0)
                                             : ExtReal::infinity();
}

ProxResult L1Ball::prox(const Vector& x, double gamma) const {
  check_dim(x, n_, "l1 ball prox");
  check_gamma(gamma);
  ProxResult r;
  if (x.lpNorm<1>() <= radius_) {
    r.point = x;
  } else {
    SimplexProjection sp = project_to_simplex(x.cwiseAbs(), radius_);
    r.point = Vector(n_);
    for (Index i = 0; i < n_; ++i) r.point[i] = sgn(x[i]) * sp.point[i];
  }
  r.value = 0.0;
  return r;
}

Vector L1Ball::jac_vec(const Vector& x, double gamma, const Vector& v) const {
  check_dim(x, n_, "l1 ball jac");
  check_dim(v, n_, "l1 ball jac direction");
  check_gamma(gamma);
  if (x.lpNorm<1>() <= radius_) return v;
  SimplexProjection sp = project_to_simplex(x.cwiseAbs(), radius_);
  Index m = 0;
  double acc = 0.0;
  for (Index i = 0; i < n_; ++i) {
    if (sp.point[i] > kActiveTol) {
      ++m;
      acc += sgn(x[i]) * v[i];
    }
  }
  if (m == 0) return v;  // vanishing radius, degenerate
  Vector out = Vector::Zero(n_);
  double avg = acc / static_cast<double>(m);
  for (Index i = 0; i < n_; ++i)
    if (sp.point[i] > kActiveTol) out[i] = v[i] - sgn(x[i]) * avg;
  return out;
}

// ---------------------------------------------------------------------------
// ZeroProx

ZeroProx::ZeroProx(Index n) : n_(n) {
  require(n > 0, "zero term: dimension must be positive");
}

ExtReal ZeroProx::value(const Vector& z) const {
  check_dim(z, n_, "zero term value");
  return ExtReal::finite(0.0);
}

ProxResult ZeroProx::prox(const Vector& x, double gamma) const {
  check_dim(x, n_, "zero term prox");
  check_gamma(gamma);
  return {x, 0.0};
}

Vector ZeroProx::jac_vec(const Vector& x, double gamma,
                         const Vector& v) const {
  check_dim(x, n_, "zero term jac");
  check_dim(v, n_, "zero term jac direction");
  check_gamma(gamma);
  return v;
}

// ---------------------------------------------------------------------------
// SeparableSum

SeparableSum::SeparableSum(Index n, std::vector<Part> parts)
    : n_(n), parts_(std::move(parts)) {
  require(n > 0, "separable sum: dimension must be positive");
  std::vector<char> seen(static_cast<size_t>(n), 0);
  for (const auto& p : parts_) {
    require(p.oracle != nullptr, "separable sum: null part");
    require(static_cast<Index>(p.indices.size()) == p.oracle->dim(),
            "separable sum: block size does not match part dimension");
    for (Index i : p.indices) {
      require(i >= 0 && i < n, "separable sum: index out of range");
      require(!seen[static_cast<size_t>(i)],
              "separable sum: blocks must be disjoint");
      seen[static_cast<size_t>(i)] = 1;
    }
  }
  for (char c : seen)
    require(c, "separable sum: blocks must cover every coordinate");
}

ExtReal SeparableSum::value(const Vector& z) const {
  check_dim(z, n_, "separable sum value");
  ExtReal total = ExtReal::finite(0.0);
  for (const auto& p : parts_) {
    Vector sub(p.indices.size());
    for (size_t j = 0; j < p.indices.size(); ++j) sub[j] = z[p.indices[j]];
    total = total + p.oracle->value(sub);
    if (total.is_inf) return total;
  }
  return total;
}

ProxResult SeparableSum::prox(const Vector& x, double gamma) const {
  check_dim(x, n_, "separable sum prox");
  check_gamma(gamma);
  ProxResult r;
  r.point = Vector(n_);
  r.value = 0.0;
  for (const auto& p : parts_) {
    Vector sub(p.indices.size());
    for (size_t j = 0; j < p.indices.size(); ++j) sub[j] = x[p.indices[j]];
    ProxResult pr = p.oracle->prox(sub, gamma);
    for (size_t j = 0; j < p.indices.size(); ++j)
      r.point[p.indices[j]] = pr.point[j];
    r.value += pr.value;
  }
  return r;
}

Vector SeparableSum::jac_vec(const Vector& x, double gamma,
                             const Vector& v) const {
  check_dim(x, n_, "separable sum jac");
  check_dim(v, n_, "separable sum jac direction");
  check_gamma(gamma);
  Vector out(n_);
  for (const auto& p : parts_) {
    Vector subx(p.indices.size()), subv(p.indices.size());
    for (size_t j = 0; j < p.indices.size(); ++j) {
      subx[j] = x[p.indices[j]];
      subv[j] = v[p.indices[j]];
    }
    Vector pv = p.oracle->jac_vec(subx, gamma, subv);
    for (size_t j = 0; j < p.indices.size(); ++j) out[p.indices[j]] = pv[j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// MoreauConjugate

namespace {

MoreauConjugate::ValueFn derive_conjugate_value(const ProxOracle& inner) {
  if (auto* simplex = dynamic_cast<const UnitSimplex*>(&inner)) {
    (void)simplex;
    return [](const Vector& z) { return ExtReal::finite(z.maxCoeff()); };
  }
  if (auto* box = dynamic_cast<const SeparableBox*>(&inner)) {
    Vector lo = box->lower(), hi = box->upper();
    return [lo, hi](const Vector& z) {
      double s = 0.0;
      for (Index i = 0; i < z.size(); ++i) {
        if (z[i] == 0.0) continue;
        double cand = z[i] > 0.0 ? hi[i] * z[i] : lo[i] * z[i];
        if (!std::isfinite(cand)) return ExtReal::infinity();
        s += cand;
      }
      return ExtReal::finite(s);
    };
  }
  if (dynamic_cast<const EuclideanBall*>(&inner)) {
    return [](const Vector& z) { return ExtReal::finite(z.norm()); };
  }
  if (auto* ball = dynamic_cast<const L1Ball*>(&inner)) {
    double r = ball->radius();
    return [r](const Vector& z) {
      return ExtReal::finite(r * z.lpNorm<Eigen::Infinity>());
    };
  }
  return {};
}

}  // namespace

MoreauConjugate::MoreauConjugate(std::shared_ptr<const ProxOracle> inner,
                                 ValueFn value_fn)
    : inner_(std::move(inner)), value_fn_(std::move(value_fn)) {
  require(inner_ != nullptr, "moreau conjugate: null inner oracle");
  if (!value_fn_) value_fn_ = derive_conjugate_value(*inner_);
  require(static_cast<bool>(value_fn_),
          "moreau conjugate: value callback required for this inner oracle");
}

ExtReal MoreauConjugate::value(const Vector& z) const {
  check_dim(z, dim(), "conjugate value");
  return value_fn_(z);
}

ProxResult MoreauConjugate::prox(const Vector& x, double gamma) const {
  check_dim(x, dim(), "conjugate prox");
  check_gamma(gamma);
  ProxResult inner_r = inner_->prox(x / gamma, 1.0 / gamma);
  ProxResult r;
  r.point = x - gamma * inner_r.point;
  ExtReal gv = value_fn_(r.point);
  if (gv.is_inf)
    throw std::runtime_error(
        "moreau conjugate: prox left the conjugate's domain (inner oracle "
        "defect or inconsistent value callback)");
  r.value = gv.v;
  return r;
}

Vector MoreauConjugate::jac_vec(const Vector& x, double gamma,
                                const Vector& v) const {
  check_dim(x, dim(), "conjugate jac");
  check_dim(v, dim(), "conjugate jac direction");
  check_gamma(gamma);
  return v - inner_->jac_vec(x / gamma, 1.0 / gamma, v);
}

}  // namespace fbtn
