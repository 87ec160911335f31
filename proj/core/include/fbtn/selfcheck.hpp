#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fbtn/prox.hpp"
#include "fbtn/rng.hpp"
#include "fbtn/types.hpp"

namespace fbtn {
namespace selfcheck {

// One named property verdict.  detail is empty on success and describes the
// worst violation otherwise (instance, sample index, measured vs allowed).
struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

// Estimated distance from x to the nearest point where prox_{gamma g}
// switches between differentiability branches; +inf when the map is smooth
// everywhere.  Deliberately conservative (may under-report the distance,
// never reports a large margin at a kink), which makes it safe as a filter
// for finite-difference checks of prox Jacobians.
double differentiability_margin(const ProxOracle& g, const Vector& x,
                                double gamma);

// Verifies that the Rayleigh quotients of a symmetric operator lie in
// [lo - tol, hi + tol].  Besides random directions, the check probes both
// ends of the spectrum with power iterations (on op and on s*I - op), so
// operators whose extreme eigenvalues sit outside the interval fail
// reliably rather than only when a random direction happens to align.
bool rayleigh_interval_check(const std::function<Vector(const Vector&)>& op,
                             Index n, double lo, double hi, double tol,
                             int directions, Rng& rng, std::string* detail);

// Property suites, one per module.  Each returns a flat list of named
// verdicts; all randomness is derived from the seed, so a given seed
// reproduces a given failure.
std::vector<CheckResult> check_smooth(std::uint64_t seed);
std::vector<CheckResult> check_prox(std::uint64_t seed);
std::vector<CheckResult> check_fbe(std::uint64_t seed);
std::vector<CheckResult> check_cg(std::uint64_t seed);
std::vector<CheckResult> check_driver(std::uint64_t seed);
std::vector<CheckResult> check_reporting(std::uint64_t seed);

std::vector<CheckResult> run_all(std::uint64_t seed);

}  // namespace selfcheck
}  // namespace fbtn
