#include "fbtn/oracles.hpp"

#include <Eigen/QR>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fbtn {
namespace oracles {

Vector fd_gradient(const std::function<double(const Vector&)>& f,
                   const Vector& x, double step) {
  Vector g(x.size());
  Vector xp = x, xm = x;
  for (Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + step;
    xm[i] = x[i] - step;
    g[i] = (f(xp) - f(xm)) / (2.0 * step);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

Vector grid_minimize(const std::function<double(const Vector&)>& obj,
                     Vector lo, Vector hi, int points_per_axis, int rounds) {
  const Index n = lo.size();
  if (n < 1 || n > 3)
    throw std::invalid_argument("grid_minimize supports 1 to 3 dimensions");
  if (hi.size() != n) throw std::invalid_argument("grid_minimize: bad bounds");
  const int P = points_per_axis;

  Vector best;
  double best_val = std::numeric_limits<double>::infinity();
  for (int round = 0; round < rounds; ++round) {
    Vector step(n);
    for (Index d = 0; d < n; ++d)
      step[d] = (hi[d] - lo[d]) / static_cast<double>(P - 1);
    long total = 1;
    for (Index d = 0; d < n; ++d) total *= P;
    Vector w(n);
    for (long flat = 0; flat < total; ++flat) {
      long rem = flat;
      for (Index d = 0; d < n; ++d) {
        w[d] = lo[d] + step[d] * static_cast<double>(rem % P);
        rem /= P;
      }
      double v = obj(w);
      if (v < best_val) {
        best_val = v;
        best = w;
      }
    }
    if (!best.size())
      continue;  // nothing feasible yet at this resolution, refine anyway? no: shrink around center
    // The discrete argmin can sit a few grid steps from the true minimizer
    // when the objective is anisotropic, so keep a generous pad around it.
    for (Index d = 0; d < n; ++d) {
      lo[d] = best[d] - 3.0 * step[d];
      hi[d] = best[d] + 3.0 * step[d];
    }
  }
  if (!best.size())
    throw std::runtime_error("grid_minimize: no feasible point found");
  return best;
}

namespace {

struct LineMin {
  double x = 0.0;
  double val = std::numeric_limits<double>::infinity();
};

// Minimize a convex (possibly extended-real) function of one variable over
// [lo, hi].  Infeasible probes are discarded toward the side that still
// contains the best finite point seen; convexity makes every discard safe,
// including at kinks, so there is no accuracy loss at constraint boundaries.
LineMin minimize_convex_line(const std::function<double(double)>& f, double lo,
                             double hi, const std::vector<double>& seeds) {
  LineMin best;
  auto consider = [&](double t) {
    if (t < lo || t > hi) return;
    double v = f(t);
    if (v < best.val) {
      best.val = v;
      best.x = t;
    }
  };
  const int scan = 129;
  for (int i = 0; i < scan; ++i)
    consider(lo + (hi - lo) * static_cast<double>(i) / (scan - 1));
  for (double s : seeds) consider(std::min(hi, std::max(lo, s)));
  if (!std::isfinite(best.val)) return best;

  double a = lo, b = hi;
  for (int it = 0; it < 240; ++it) {
    if (b - a <= 1e-13 * (1.0 + std::abs(a) + std::abs(b))) break;
    double m1 = a + (b - a) / 3.0;
    double m2 = b - (b - a) / 3.0;
    double v1 = f(m1);
    double v2 = f(m2);
    if (v1 < best.val) {
      best.val = v1;
      best.x = m1;
    }
    if (v2 < best.val) {
      best.val = v2;
      best.x = m2;
    }
    if (!std::isfinite(v1)) {
      // The domain is an interval that excludes m1; the incumbent marks the
      // side it lies on.
      if (best.x <= m1)
        b = m1;
      else
        a = m1;
    } else if (!std::isfinite(v2)) {
      if (best.x >= m2)
        a = m2;
      else
        b = m2;
    } else if (v1 <= v2) {
      b = m2;
    } else {
      a = m1;
    }
  }
  consider(0.5 * (a + b));
  return best;
}

}  // namespace

Vector prox_reference(const std::function<ExtReal(const Vector&)>& g,
                      const Vector& x, double gamma, Vector lo, Vector hi,
                      int points_per_axis, int rounds) {
  const Index n = x.size();
  auto obj = [&](const Vector& w) {
    ExtReal gv = g(w);
    if (gv.is_inf) return std::numeric_limits<double>::infinity();
    return gv.v + (w - x).squaredNorm() / (2.0 * gamma);
  };

  // In one and two dimensions the objective is minimized exactly by nested
  // one-dimensional convex searches.  An axis-aligned shrinking grid is kept
  // only for higher dimensions: at a curved constraint boundary its discrete
  // argmin trades a first-order cost in one direction against a second-order
  // cost in another, which caps its accuracy near sqrt(grid step).
  if (n == 1) {
    LineMin m = minimize_convex_line([&](double t) { return obj(Vector::Constant(1, t)); },
                                     lo[0], hi[0], {x[0], 0.0});
    if (!std::isfinite(m.val))
      throw std::runtime_error("prox reference: no feasible point found");
    return Vector::Constant(1, m.x);
  }
  if (n == 2) {
    auto slice = [&](double w0) {
      return minimize_convex_line(
          [&](double t) {
            Vector w(2);
            w << w0, t;
            return obj(w);
          },
          lo[1], hi[1], {x[1], 0.0});
    };
    LineMin outer = minimize_convex_line(
        [&](double w0) { return slice(w0).val; }, lo[0], hi[0], {x[0], 0.0});
    if (!std::isfinite(outer.val))
      throw std::runtime_error("prox reference: no feasible point found");
    Vector w(2);
    w << outer.x, slice(outer.x).x;
    return w;
  }

  double coarse_step = 0.0;
  for (Index d = 0; d < n; ++d)
    coarse_step = std::max(
        coarse_step, (hi[d] - lo[d]) / static_cast<double>(points_per_axis - 1));

  Vector best;
  double best_val = std::numeric_limits<double>::infinity();
  try {
    best = grid_minimize(obj, lo, hi, points_per_axis, rounds);
    best_val = obj(best);
  } catch (const std::runtime_error&) {
    // A coarse grid can step clean over a thin feasible set; the annealed
    // sweep below then has to find feasibility on its own.
    best = 0.5 * (lo + hi);
  }

  // Shrinking axis-aligned grids stall at sqrt(step) accuracy when the
  // minimizer sits on a curved constraint boundary or a kink valley (the
  // discrete argmin trades a first-order cost along one direction against a
  // second-order cost along another).  An annealed cloud of feasible trial
  // points around the incumbent recovers the missing digits.  The fixed seed
  // keeps the reference deterministic.
  Rng polish_rng(0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(n));
  double scale = std::max(coarse_step, 1e-8);
  for (int level = 0; level < 48; ++level) {
    for (int t = 0; t < 80; ++t) {
      Vector cand = best + scale * polish_rng.gaussian_vector(n);
      double v = obj(cand);
      if (v < best_val) {
        best_val = v;
        best = cand;
      }
    }
    scale *= 0.72;
  }
  if (!std::isfinite(best_val))
    throw std::runtime_error("prox reference: no feasible point found");
  return best;
}

Vector simplex_projection_reference(const Vector& x, double s) {
  const Index n = x.size();
  if (n > 20)
    throw std::invalid_argument("simplex reference: dimension too large");
  Vector best;
  for (unsigned long mask = 1; mask < (1ul << n); ++mask) {
    // mask picks the candidate support
    int m = 0;
    double sum = 0.0;
    for (Index i = 0; i < n; ++i)
      if (mask & (1ul << i)) {
        ++m;
        sum += x[i];
      }
    double t = (sum - s) / static_cast<double>(m);
    bool ok = true;
    Vector z = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) {
      if (mask & (1ul << i)) {
        z[i] = x[i] - t;
        if (z[i] < -1e-12) ok = false;    // primal feasibility
      } else if (x[i] - t > 1e-12) {
        ok = false;                        // dual feasibility
      }
    }
    if (ok) {
      best = z;
      break;
    }
  }
  if (!best.size())
    throw std::runtime_error("simplex reference: no KKT point found");
  return best;
}

namespace {

double ternary_min(const std::function<double(double)>& h, double lo,
                   double hi, int iters = 200) {
  for (int i = 0; i < iters; ++i) {
    double m1 = lo + (hi - lo) / 3.0;
    double m2 = hi - (hi - lo) / 3.0;
    if (h(m1) <= h(m2))
      hi = m2;
    else
      lo = m1;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double moreau_envelope_1d(const std::function<double(double)>& phi, double x,
                          double gamma, double lo, double hi) {
  auto h = [&](double w) { return phi(w) + (w - x) * (w - x) / (2.0 * gamma); };
  double w = ternary_min(h, lo, hi);
  return h(w);
}

double moreau_envelope_cd(const std::function<double(const Vector&)>& phi,
                          const Vector& x, double gamma, double radius,
                          int sweeps) {
  Vector w = x;
  auto h = [&](const Vector& u) {
    return phi(u) + (u - x).squaredNorm() / (2.0 * gamma);
  };
  for (int s = 0; s < sweeps; ++s) {
    for (Index d = 0; d < x.size(); ++d) {
      Vector probe = w;
      auto line = [&](double t) {
        probe[d] = t;
        return h(probe);
      };
      w[d] = ternary_min(line, w[d] - radius, w[d] + radius, 120);
      probe[d] = w[d];
    }
  }
  return h(w);
}

Matrix random_orthogonal(Rng& rng, Index n) {
  Eigen::MatrixXd G = rng.gaussian_matrix(n, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i)
    if (R(i, i) < 0.0) Q.col(i) *= -1.0;
  return Q;
}

}  // namespace oracles
}  // namespace fbtn
