#include "frechet/objective.hpp"

#include <algorithm>
#include <limits>

namespace frechet {

SmoothingConfig SmoothingConfig::defaults_for(int num_classes) {
  if (num_classes < 2) throw ArgumentError("need at least two classes");
  return {0.01 / std::log(static_cast<double>(num_classes)), 1.0};
}

void SmoothingConfig::validate() const {
  if (!(epsilon >= kMinEpsilon) || !std::isfinite(epsilon)) {
    throw ArgumentError("epsilon must be finite and at least 1e-6");
  }
  if (!(penalty_weight >= 0.0) || !std::isfinite(penalty_weight)) {
    throw ArgumentError("penalty weight must be finite and non-negative");
  }
}

namespace {

// Signed temperature: the lower side works with exp(-b / ε).
double signed_temperature(double epsilon, ObjectiveSide side) {
  return side == ObjectiveSide::lower ? -epsilon : epsilon;
}

// t * ln[(1/K) Σ exp(b_k / t)] with the extreme term factored out.
template <typename Values>
double log_mean_exp(const Values& b, Eigen::Index k, double t) {
  double pivot = b[0];
  for (Eigen::Index j = 1; j < k; ++j) {
    pivot = t > 0 ? std::max(pivot, b[j]) : std::min(pivot, b[j]);
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) sum += std::exp((b[j] - pivot) / t);
  return pivot + t * std::log(sum / static_cast<double>(k));
}

}  // namespace

double soft_extreme(std::span<const double> values, double epsilon, ObjectiveSide side) {
  if (values.empty()) throw ArgumentError("soft_extreme of an empty list");
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
  return log_mean_exp(values, static_cast<Eigen::Index>(values.size()),
                      signed_temperature(epsilon, side));
}

DualProblem::DualProblem(const DatasetView& data, const LabelModel& model, const GMatrix& g)
    : g_(g.values()), z_ids_(data.z_ids) {
  if (!data.signatures) throw ArgumentError("dataset has no signature table");
  if (static_cast<std::size_t>(g_.rows()) != data.n()) {
    throw ArgumentError("G has " + std::to_string(g_.rows()) + " rows for " +
                        std::to_string(data.n()) + " samples");
  }
  if (g_.cols() != model.num_classes()) {
    throw ArgumentError("G column count differs from the label model's class count");
  }
  label_probs_ = model.aligned(*data.signatures);
  for (auto z : z_ids_) {
    if (z >= static_cast<std::size_t>(label_probs_.cols())) throw ArgumentError("z-id out of range");
  }
}

void DualProblem::check_shape(const DualVariables& a) const {
  if (a.rows() != num_classes() || a.cols() != num_signatures()) {
    throw ArgumentError("dual variables must be |Y| x |Z|");
  }
}

Eigen::VectorXd DualProblem::per_sample(const DualVariables& a, const SmoothingConfig& cfg,
                                        ObjectiveSide side) const {
  check_shape(a);
  const double t = signed_temperature(cfg.epsilon, side);
  const Eigen::Index k = num_classes();
  // E_{P̂(Y|z)}[a_{Yz}] per signature.
  const Eigen::RowVectorXd expected = label_probs_.cwiseProduct(a).colwise().sum();
  Eigen::VectorXd out(static_cast<Eigen::Index>(n()));
  Eigen::VectorXd shifted(k);
  for (std::size_t i = 0; i < n(); ++i) {
    const auto z = static_cast<Eigen::Index>(z_ids_[i]);
    shifted = g_.row(static_cast<Eigen::Index>(i)).transpose() + a.col(z);
    out[static_cast<Eigen::Index>(i)] = log_mean_exp(shifted, k, t) - expected[z];
  }
  return out;
}

double DualProblem::objective(const DualVariables& a, const SmoothingConfig& cfg,
                              ObjectiveSide side) const {
  const Eigen::VectorXd values = per_sample(a, cfg, side);
  double total = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) total += values[i];
  return total / static_cast<double>(n());
}

double DualProblem::penalized(const DualVariables& a, const SmoothingConfig& cfg,
                              ObjectiveSide side) const {
  const double penalty = cfg.penalty_weight * penalty_residual(a);
  const double base = objective(a, cfg, side);
  return side == ObjectiveSide::upper ? base + penalty : base - penalty;
}

DualVariables DualProblem::gradient(const DualVariables& a, const SmoothingConfig& cfg,
                                    ObjectiveSide side) const {
  check_shape(a);
  const double t = signed_temperature(cfg.epsilon, side);
  const Eigen::Index k = num_classes();
  const double inv_n = 1.0 / static_cast<double>(n());

  // Accumulate Σ_i s_{kl}(X_i) per signature, then subtract the label-model mass.
  DualVariables weights = DualVariables::Zero(k, num_signatures());
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(num_signatures());
  Eigen::VectorXd shifted(k);
  for (std::size_t i = 0; i < n(); ++i) {
    const auto z = static_cast<Eigen::Index>(z_ids_[i]);
    shifted = g_.row(static_cast<Eigen::Index>(i)).transpose() + a.col(z);
    const double pivot = t > 0 ? shifted.maxCoeff() : shifted.minCoeff();
    shifted = ((shifted.array() - pivot) / t).exp();
    weights.col(z) += shifted / shifted.sum();
    counts[z] += 1.0;
  }
  DualVariables grad(k, num_signatures());
  const Eigen::RowVectorXd col_sums = a.colwise().sum();
  const double sign = side == ObjectiveSide::upper ? 1.0 : -1.0;
  for (Eigen::Index z = 0; z < num_signatures(); ++z) {
    grad.col(z) = sign * inv_n * (weights.col(z) - counts[z] * label_probs_.col(z));
    grad.col(z).array() += 2.0 * cfg.penalty_weight * col_sums[z];
  }
  return grad;
}

double eval_objective(const DatasetView& data, const LabelModel& model, const GMatrix& g,
                      const DualVariables& a, const SmoothingConfig& cfg, ObjectiveSide side) {
  cfg.validate();
  return DualProblem(data, model, g).objective(a, cfg, side);
}

double eval_penalized(const DatasetView& data, const LabelModel& model, const GMatrix& g,
                      const DualVariables& a, const SmoothingConfig& cfg, ObjectiveSide side) {
  cfg.validate();
  return DualProblem(data, model, g).penalized(a, cfg, side);
}

DualVariables gradient(const DatasetView& data, const LabelModel& model, const GMatrix& g,
                       const DualVariables& a, const SmoothingConfig& cfg, ObjectiveSide side) {
  cfg.validate();
  return DualProblem(data, model, g).gradient(a, cfg, side);
}

}  // namespace frechet
