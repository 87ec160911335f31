#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "fbtn/fbe.hpp"
#include "fbtn/solver.hpp"
#include "fbtn/types.hpp"

namespace fbtn {

// Raised for any defect in a run configuration; the message names the
// offending key.  The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A fully instantiated problem: oracles, start point, solver options with
// config overrides applied, and a one-line description for reports.
struct ProblemBundle {
  std::shared_ptr<const SmoothOracle> smooth;
  std::shared_ptr<const ProxOracle> nonsmooth;
  Vector x0;
  std::string kind;
  Index m = 0;
  Index n = 0;
  std::uint64_t seed = 0;
  SolverOptions options;
  std::optional<double> gamma_override;
  double fbs_relax = 1.0;
  std::string summary;
};

// Parses a JSON run configuration.  Recognized problem kinds: lasso,
// box_qp, group_lasso, logistic_l1, custom_quadratic_prox.  Data is either
// given inline (matrices as arrays of rows) or generated from the seed, so
// a config plus a seed fully determines the instance.
ProblemBundle load_config_text(const std::string& text);
ProblemBundle load_config_file(const std::string& path);

}  // namespace fbtn
