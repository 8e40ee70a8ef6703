#pragma once

#include <vector>

#include "frechet/domain.hpp"

namespace frechet {

// Transportation problem: ship row masses to column masses at minimum cost.
struct TransportInstance {
  Eigen::MatrixXd costs;     // rows x columns
  Eigen::VectorXd row_mass;  // one entry per row
  Eigen::VectorXd col_mass;  // one entry per column
};

struct SignatureContribution {
  std::size_t z = 0;
  double lower = 0.0;
  double upper = 0.0;
};

struct OracleResult {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<SignatureContribution> per_signature;  // ascending z
};

inline constexpr double kOracleSizeLimit = 1e6;

// Exact (unsmoothed) Fréchet bounds of the empirical problem: one min-cost and
// one max-cost transport per signature, summed in ascending z order.
OracleResult exact_bounds(const DatasetView& data, const LabelModel& model, const GMatrix& g);

// Two-column fast path: fractional knapsack on c(., 1) - c(., 0).
double transport_binary(const TransportInstance& inst);

// Transportation simplex with lowest-index entering and leaving rules.
double transport_general(const TransportInstance& inst);

}  // namespace frechet
