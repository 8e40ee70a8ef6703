#pragma once

#include <cmath>
#include <span>

#include "frechet/domain.hpp"

namespace frechet {

enum class ObjectiveSide { lower, upper };

inline const char* to_string(ObjectiveSide side) {
  return side == ObjectiveSide::lower ? "lower" : "upper";
}

inline constexpr double kMinEpsilon = 1e-6;

struct SmoothingConfig {
  double epsilon;
  double penalty_weight = 1.0;

  // epsilon = 0.01 / ln|Y|: at most 0.01 units of smoothing bias.
  static SmoothingConfig defaults_for(int num_classes);
  void validate() const;
};

// Log-mean-exp soft minimum (lower) or soft maximum (upper) at temperature epsilon.
double soft_extreme(std::span<const double> values, double epsilon, ObjectiveSide side);

// Dataset, aligned label model and G bundled for repeated evaluation.
// All evaluation is O(n |Y| + |Z| |Y|).
class DualProblem {
 public:
  DualProblem(const DatasetView& data, const LabelModel& model, const GMatrix& g);

  Eigen::Index num_classes() const { return g_.cols(); }
  Eigen::Index num_signatures() const { return label_probs_.cols(); }
  std::size_t n() const { return z_ids_.size(); }
  const Eigen::MatrixXd& label_probs() const { return label_probs_; }
  const Eigen::MatrixXd& g() const { return g_; }
  const std::vector<std::size_t>& z_ids() const { return z_ids_; }

  // f̂_{side,ε}(X_i, Z_i, a) for every sample.
  Eigen::VectorXd per_sample(const DualVariables& a, const SmoothingConfig& cfg,
                             ObjectiveSide side) const;

  // Mean of per_sample (penalty excluded).
  double objective(const DualVariables& a, const SmoothingConfig& cfg, ObjectiveSide side) const;

  // objective ± ρ Σ_z(Σ_y a)², + for upper, − for lower.
  double penalized(const DualVariables& a, const SmoothingConfig& cfg, ObjectiveSide side) const;

  // Gradient of penalized (upper) or of −penalized (lower); i.e. always the
  // gradient of the function that gets minimized.
  DualVariables gradient(const DualVariables& a, const SmoothingConfig& cfg,
                         ObjectiveSide side) const;

  void check_shape(const DualVariables& a) const;

 private:
  Eigen::MatrixXd g_;
  Eigen::MatrixXd label_probs_;
  std::vector<std::size_t> z_ids_;
};

double eval_objective(const DatasetView& data, const LabelModel& model, const GMatrix& g,
                      const DualVariables& a, const SmoothingConfig& cfg, ObjectiveSide side);

double eval_penalized(const DatasetView& data, const LabelModel& model, const GMatrix& g,
                      const DualVariables& a, const SmoothingConfig& cfg, ObjectiveSide side);

DualVariables gradient(const DatasetView& data, const LabelModel& model, const GMatrix& g,
                       const DualVariables& a, const SmoothingConfig& cfg, ObjectiveSide side);

}  // namespace frechet
