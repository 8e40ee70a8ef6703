#pragma once

#include <cstdint>
#include <utility>

#include "frechet/objective.hpp"
#include "frechet/solver.hpp"

namespace frechet {

struct BoundEstimate {
  ObjectiveSide side = ObjectiveSide::lower;
  double value = 0.0;
  DualVariables optimizer;  // centered
  double plugin_std = 0.0;
  std::size_t n = 0;
  SolveReport report;
  double epsilon = 0.0;
};

struct ConfidenceInterval {
  double level = 0.0;
  double low = 0.0;
  double high = 0.0;
};

struct BoundPair {
  BoundEstimate lower;
  BoundEstimate upper;
};

// Solves one side from a0 = 0, centers the optimizer and reports the unpenalized
// objective at the centered point.
BoundEstimate estimate_bound(const DualProblem& problem, const SmoothingConfig& cfg,
                             const SolverConfig& scfg, ObjectiveSide side);

BoundPair estimate_bounds(const DualProblem& problem, const SmoothingConfig& cfg,
                          const SolverConfig& scfg);

BoundPair estimate_bounds(const DatasetView& data, const LabelModel& model, const GMatrix& g,
                          const SmoothingConfig& cfg, const SolverConfig& scfg);

// Sample standard deviation (divisor n - 1) of the per-sample dual values at a_hat.
double plugin_std(const DualProblem& problem, const DualVariables& a_hat,
                  const SmoothingConfig& cfg, ObjectiveSide side);

double plugin_std(const DatasetView& data, const LabelModel& model, const GMatrix& g,
                  const DualVariables& a_hat, const SmoothingConfig& cfg, ObjectiveSide side);

// Φ⁻¹(p) for p in (0, 1).
double normal_quantile(double p);

// value ± Φ⁻¹(1 - gamma/2) σ̂ / √n.
ConfidenceInterval confidence_interval(const BoundEstimate& est, double gamma);
ConfidenceInterval confidence_interval(double value, double std, std::size_t n, double gamma);

// Mean over samples of P̂(Y = positive_class | Z_i).
double estimate_class_prior(const DatasetView& data, const LabelModel& model, int positive_class);

// Uniform subset without replacement; original row order is kept.
DatasetView subsample_for_bounds(const DatasetView& data, std::size_t n_target, std::uint64_t seed);

}  // namespace frechet
