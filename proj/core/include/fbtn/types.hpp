#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>
#include <string>

namespace fbtn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

// Extended-real value for functions that may take the value +infinity
// (indicator functions).  Kept as an explicit flag instead of IEEE inf so
// that arithmetic on finite parts never produces NaN by accident.
struct ExtReal {
  double v = 0.0;
  bool is_inf = false;

  static ExtReal finite(double x) { return {x, false}; }
  static ExtReal infinity() { return {0.0, true}; }

  bool finite_value() const { return !is_inf; }

  double as_double() const {
    return is_inf ? std::numeric_limits<double>::infinity() : v;
  }

  ExtReal operator+(const ExtReal& o) const {
    if (is_inf || o.is_inf) return infinity();
    return finite(v + o.v);
  }
  ExtReal operator+(double o) const {
    if (is_inf) return infinity();
    return finite(v + o);
  }
  bool operator<=(const ExtReal& o) const {
    if (o.is_inf) return true;
    if (is_inf) return false;
    return v <= o.v;
  }
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

inline void check_dim(const Vector& x, Index n, const char* ctx) {
  if (x.size() != n)
    throw std::invalid_argument(std::string(ctx) + ": expected dimension " +
                                std::to_string(n) + ", got " +
                                std::to_string(x.size()));
}

}  // namespace fbtn
