#pragma once

#include <functional>
#include <utility>

#include "frechet/domain.hpp"

namespace frechet {

struct SolverConfig {
  int max_iterations = 500;
  // Stop once the sup-norm of the gradient falls to this value.
  double gradient_tolerance = 1e-8;
  int memory_pairs = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search_steps = 40;

  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  double final_gradient_norm = 0.0;
  bool converged = false;
  double penalty_residual = 0.0;
  double optimizer_sup_norm = 0.0;
  // Final objective value (of the function that was minimized).
  double final_value = 0.0;
};

using ValueFn = std::function<double(const DualVariables&)>;
using GradientFn = std::function<DualVariables(const DualVariables&)>;

// L-BFGS with a strong-Wolfe line search. Deterministic for fixed inputs.
// Returns the last iterate; converged is true iff its gradient sup-norm is within
// tolerance. Throws NumericalError (carrying the last finite iterate, flattened
// z-major) if a value or gradient is non-finite.
std::pair<DualVariables, SolveReport> minimize(const ValueFn& value, const GradientFn& grad,
                                               const DualVariables& a0, const SolverConfig& cfg);

}  // namespace frechet
