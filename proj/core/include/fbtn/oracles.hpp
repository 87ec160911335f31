#pragma once

#include <functional>

#include "fbtn/rng.hpp"
#include "fbtn/types.hpp"

namespace fbtn {

// Slow, independent reference computations used to validate the fast paths.
// Everything here works from scratch on plain callables (finite differences,
// exhaustive grids, KKT enumeration) and deliberately shares no code with
// the production implementations it is used to check.
namespace oracles {

// central-difference gradient of a scalar callable
Vector fd_gradient(const std::function<double(const Vector&)>& f,
                   const Vector& x, double step);

// Minimize a callable over the box [lo, hi] by exhaustive gridding followed
// by shrink-and-refine rounds.  The callable may return +inf for infeasible
// points; throws if no grid point is ever feasible.
Vector grid_minimize(const std::function<double(const Vector&)>& obj,
                     Vector lo, Vector hi, int points_per_axis, int rounds);

// Reference proximal point: minimize g(w) + ||w - x||^2/(2 gamma) over the
// given box, g given as an extended-real callable.
Vector prox_reference(const std::function<ExtReal(const Vector&)>& g,
                      const Vector& x, double gamma, Vector lo, Vector hi,
                      int points_per_axis = 41, int rounds = 10);

// Exact projection onto {z >= 0, sum z = s} by enumerating candidate
// support sets and checking the optimality conditions of each.
Vector simplex_projection_reference(const Vector& x, double s);

// Moreau envelope of a scalar convex callable, by ternary search on
// [lo, hi] (the minimizer must be interior for the result to be trusted).
double moreau_envelope_1d(const std::function<double(double)>& phi, double x,
                          double gamma, double lo, double hi);

// Moreau envelope of a convex callable whose nonsmooth part is separable,
// by cyclic coordinate minimization with ternary line searches starting
// from x, searching within the given radius per coordinate.
double moreau_envelope_cd(const std::function<double(const Vector&)>& phi,
                          const Vector& x, double gamma, double radius,
                          int sweeps = 80);

// Haar-ish random orthogonal matrix (QR of a Gaussian matrix with the sign
// convention fixed), used to build test operators with a known spectrum.
Matrix random_orthogonal(Rng& rng, Index n);

}  // namespace oracles
}  // namespace fbtn
