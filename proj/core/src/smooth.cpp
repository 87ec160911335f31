#include "fbtn/smooth.hpp"

#include <cmath>
#include <functional>

#include "fbtn/rng.hpp"

namespace fbtn {

double power_iteration_max_eig(
    const std::function<Vector(const Vector&)>& matvec, Index n,
    int max_iters, double rel_tol) {
  require(n > 0, "power iteration: empty operator");
  // fixed seed so the estimate (and every stepsize derived from it) is
  // reproducible run to run
  Rng rng(0x9e3779b97f4a7c15ull);
  Vector v = rng.gaussian_vector(n);
  double nv = v.norm();
  if (nv == 0.0) {
    v.setOnes();
    nv = v.norm();
  }
  v /= nv;
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vector w = matvec(v);
    double nw = w.norm();
    if (nw == 0.0) return 0.0;  // v in the null space and nothing leaked out
    double lambda_new = v.dot(w);
    v = w / nw;
    if (it > 0 && std::abs(lambda_new - lambda) <= rel_tol * std::abs(lambda_new)) {
      lambda = lambda_new;
      break;
    }
    lambda = lambda_new;
  }
  return std::max(lambda, 0.0);
}

QuadraticSmooth::QuadraticSmooth(Matrix H, Vector h) : h_(std::move(h)) {
  require(H.rows() == H.cols(), "quadratic: H must be square");
  require(H.rows() == h_.size(), "quadratic: H and h dimensions disagree");
  H_ = 0.5 * (H + H.transpose());
}

double QuadraticSmooth::value(const Vector& x) const {
  check_dim(x, dim(), "quadratic value");
  return 0.5 * x.dot(H_ * x) + h_.dot(x);
}

Vector QuadraticSmooth::gradient(const Vector& x) const {
  check_dim(x, dim(), "quadratic gradient");
  return H_ * x + h_;
}

Vector QuadraticSmooth::hess_vec(const Vector& x, const Vector& p) const {
  check_dim(x, dim(), "quadratic hess_vec");
  check_dim(p, dim(), "quadratic hess_vec direction");
  return H_ * p;
}

std::optional<double> QuadraticSmooth::lipschitz_estimate() const {
  double lam = power_iteration_max_eig(
      [this](const Vector& v) { return Vector(H_ * v); }, dim());
  // inflate a converged-from-below estimate into an upper bound
  return lam * 1.01;
}

LeastSquaresSmooth::LeastSquaresSmooth(Matrix A, Vector b)
    : A_(std::move(A)), b_(std::move(b)) {
  require(A_.rows() == b_.size(), "least squares: A and b dimensions disagree");
  require(A_.cols() > 0, "least squares: empty A");
}

double LeastSquaresSmooth::value(const Vector& x) const {
  check_dim(x, dim(), "least squares value");
  return 0.5 * (A_ * x - b_).squaredNorm();
}

Vector LeastSquaresSmooth::gradient(const Vector& x) const {
  check_dim(x, dim(), "least squares gradient");
  return A_.transpose() * (A_ * x - b_);
}

Vector LeastSquaresSmooth::hess_vec(const Vector& x, const Vector& p) const {
  check_dim(x, dim(), "least squares hess_vec");
  check_dim(p, dim(), "least squares hess_vec direction");
  return A_.transpose() * (A_ * p);
}

std::optional<double> LeastSquaresSmooth::lipschitz_estimate() const {
  double lam = power_iteration_max_eig(
      [this](const Vector& v) { return Vector(A_.transpose() * (A_ * v)); },
      dim());
  return lam * 1.01;
}

LogisticSmooth::LogisticSmooth(Matrix A, Vector y)
    : A_(std::move(A)), y_(std::move(y)) {
  require(A_.rows() == y_.size(), "logistic: A and y dimensions disagree");
  for (Index i = 0; i < y_.size(); ++i)
    require(y_[i] == 1.0 || y_[i] == -1.0, "logistic: labels must be +-1");
}

double LogisticSmooth::value(const Vector& x) const {
  check_dim(x, dim(), "logistic value");
  Vector t = (A_ * x).cwiseProduct(y_);
  double s = 0.0;
  for (Index i = 0; i < t.size(); ++i) {
    // log(1 + exp(-t)) without overflow for large |t|
    double ti = t[i];
    s += ti >= 0.0 ? std::log1p(std::exp(-ti)) : -ti + std::log1p(std::exp(ti));
  }
  return s;
}

Vector LogisticSmooth::gradient(const Vector& x) const {
  check_dim(x, dim(), "logistic gradient");
  Vector t = (A_ * x).cwiseProduct(y_);
  Vector s(t.size());
  for (Index i = 0; i < t.size(); ++i) {
    // d/dt log(1+e^{-t}) = -sigma(-t)
    double ti = t[i];
    double sig = ti >= 0.0 ? std::exp(-ti) / (1.0 + std::exp(-ti))
                           : 1.0 / (1.0 + std::exp(ti));
    s[i] = -y_[i] * sig;
  }
  return A_.transpose() * s;
}

Vector LogisticSmooth::hess_vec(const Vector& x, const Vector& p) const {
  check_dim(x, dim(), "logistic hess_vec");
  check_dim(p, dim(), "logistic hess_vec direction");
  Vector t = (A_ * x).cwiseProduct(y_);
  Vector ap = A_ * p;
  for (Index i = 0; i < t.size(); ++i) {
    double ti = t[i];
    double e = std::exp(-std::abs(ti));
    double w = e / ((1.0 + e) * (1.0 + e));  // sigma(t) sigma(-t)
    ap[i] *= w;
  }
  return A_.transpose() * ap;
}

ZeroSmooth::ZeroSmooth(Index n) : n_(n) { require(n > 0, "zero oracle: dimension must be positive"); }

double ZeroSmooth::value(const Vector& x) const {
  check_dim(x, n_, "zero value");
  return 0.0;
}

Vector ZeroSmooth::gradient(const Vector& x) const {
  check_dim(x, n_, "zero gradient");
  return Vector::Zero(n_);
}

Vector ZeroSmooth::hess_vec(const Vector& x, const Vector& p) const {
  check_dim(x, n_, "zero hess_vec");
  check_dim(p, n_, "zero hess_vec direction");
  return Vector::Zero(n_);
}

}  // namespace fbtn
