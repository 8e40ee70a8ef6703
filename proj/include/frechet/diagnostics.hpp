#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frechet/bounds.hpp"

namespace frechet {

// (1/2) Σ |p - q|.
double tv_distance(std::span<const double> p, std::span<const double> q);

// H(Y | Z) in nats: Σ_z w_z (-Σ_y p(y|z) ln p(y|z)), with 0 ln 0 = 0.
// `model_probs` is the |Y| x |Z| aligned table; weights must lie on the simplex.
double conditional_entropy_y(const Eigen::MatrixXd& model_probs, const Eigen::VectorXd& z_weights);

// Weights default to the empirical signature frequencies of `data`.
double conditional_entropy_y(const LabelModel& model, const DatasetView& data);

// Empirical signature frequencies.
Eigen::VectorXd signature_frequencies(const DatasetView& data);

// H(X | Z) for a categorical X given as category ids, using empirical frequencies.
double conditional_entropy_x(const DatasetView& data, const std::vector<int>& x_categories);

// sqrt(8 g_sup² h_cond): cap on U - L.
double informativeness_bound(double g_sup, double h_cond);

struct MisspecReport {
  double delta = 0.0;  // max_z d_TV(P(.|z), Q(.|z)) over observed z
  double bound_gap_lower = 0.0;
  double bound_gap_upper = 0.0;
  // 2 δ max(‖â_P‖∞, ‖â_Q‖∞) with the optimizers of the matching side.
  double certificate_lower = 0.0;
  double certificate_upper = 0.0;
  double certificate = 0.0;  // max of the two
  double optimizer_norm_p = 0.0;
  double optimizer_norm_q = 0.0;
  bool within_certificate = false;
  BoundPair bounds_p;
  BoundPair bounds_q;
  std::vector<std::string> notes;
};

inline constexpr double kCertificateTolerance = 1e-5;

MisspecReport misspecification_report(const DatasetView& data, const LabelModel& model_p,
                                      const LabelModel& model_q, const GMatrix& g,
                                      const SmoothingConfig& cfg, const SolverConfig& scfg);

// (1/n) Σ_i Σ_y P̂(y | Z_i) G[i, y].
double label_model_score(const DatasetView& data, const LabelModel& model, const GMatrix& g);

enum class SelectionStrategy { lower, upper, average, label_model };

const char* to_string(SelectionStrategy s);
SelectionStrategy parse_selection_strategy(const std::string& name);

struct SelectionCandidate {
  double lower = 0.0;
  double upper = 0.0;
  double label_model_score = 0.0;
};

struct SelectionResult {
  SelectionStrategy strategy = SelectionStrategy::lower;
  std::size_t chosen_index = 0;
  std::vector<double> scores;
};

// Argmax of the strategy's score; ties go to the lowest index.
SelectionResult select_model(const std::vector<SelectionCandidate>& candidates,
                             SelectionStrategy strategy);

}  // namespace frechet
