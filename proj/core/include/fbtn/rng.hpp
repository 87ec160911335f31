#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "fbtn/types.hpp"

namespace fbtn {

// Deterministic random source used by problem generators and test drivers.
// Uniform doubles are built from the top 53 bits of mt19937_64 output and
// normals via the Box-Muller transform, so a given seed yields the same
// stream on every platform and standard library (std::normal_distribution
// is not pinned down by the standard, hence the hand-rolled transform).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform on [0, 1)
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // uniform on [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vector gaussian_vector(Index n) {
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[i] = gaussian();
    return x;
  }

  Matrix gaussian_matrix(Index rows, Index cols) {
    Matrix a(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) a(i, j) = gaussian();
    return a;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace fbtn
