#include "frechet/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace frechet {

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ArgumentError("tv_distance: length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - q[i]);
  return std::clamp(0.5 * total, 0.0, 1.0);
}

namespace {

double entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

}  // namespace

double conditional_entropy_y(const Eigen::MatrixXd& model_probs, const Eigen::VectorXd& z_weights) {
  if (model_probs.cols() != z_weights.size()) {
    throw ArgumentError("one weight per signature required");
  }
  if ((z_weights.array() < 0.0).any() || std::abs(z_weights.sum() - 1.0) > kSimplexTolerance) {
    throw ArgumentError("signature weights must lie on the simplex");
  }
  double h = 0.0;
  for (Eigen::Index z = 0; z < model_probs.cols(); ++z) {
    if (z_weights[z] > 0.0) h += z_weights[z] * entropy(model_probs.col(z));
  }
  return h;
}

Eigen::VectorXd signature_frequencies(const DatasetView& data) {
  if (data.n() == 0) throw InsufficientSampleError("no samples");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.num_signatures()));
  for (auto z : data.z_ids) w[static_cast<Eigen::Index>(z)] += 1.0;
  return w / static_cast<double>(data.n());
}

double conditional_entropy_y(const LabelModel& model, const DatasetView& data) {
  return conditional_entropy_y(model.aligned(*data.signatures), signature_frequencies(data));
}

double conditional_entropy_x(const DatasetView& data, const std::vector<int>& x_categories) {
  if (x_categories.size() != data.n()) throw ArgumentError("one category per sample required");
  if (data.n() == 0) throw InsufficientSampleError("no samples");
  std::map<std::pair<std::size_t, int>, double> joint;
  std::map<std::size_t, double> marginal;
  for (std::size_t i = 0; i < data.n(); ++i) {
    joint[{data.z_ids[i], x_categories[i]}] += 1.0;
    marginal[data.z_ids[i]] += 1.0;
  }
  const double n = static_cast<double>(data.n());
  double h = 0.0;
  for (const auto& [key, count] : joint) {
    h -= (count / n) * std::log(count / marginal[key.first]);
  }
  return h;
}

double informativeness_bound(double g_sup, double h_cond) {
  if (!(g_sup >= 0.0) || !(h_cond >= 0.0)) {
    throw ArgumentError("informativeness bound needs non-negative inputs");
  }
  return std::sqrt(8.0 * g_sup * g_sup * h_cond);
}

MisspecReport misspecification_report(const DatasetView& data, const LabelModel& model_p,
                                      const LabelModel& model_q, const GMatrix& g,
                                      const SmoothingConfig& cfg, const SolverConfig& scfg) {
  const Eigen::MatrixXd p = model_p.aligned(*data.signatures);
  const Eigen::MatrixXd q = model_q.aligned(*data.signatures);

  MisspecReport report;
  std::vector<bool> observed(data.num_signatures(), false);
  for (auto z : data.z_ids) observed[z] = true;
  for (Eigen::Index z = 0; z < p.cols(); ++z) {
    if (!observed[static_cast<std::size_t>(z)]) continue;
    const Eigen::VectorXd pc = p.col(z);
    const Eigen::VectorXd qc = q.col(z);
    report.delta = std::max(report.delta, tv_distance(std::span<const double>(pc.data(), pc.size()),
                                                      std::span<const double>(qc.data(), qc.size())));
  }

  report.bounds_p = estimate_bounds(data, model_p, g, cfg, scfg);
  report.bounds_q = estimate_bounds(data, model_q, g, cfg, scfg);
  const auto& bp = report.bounds_p;
  const auto& bq = report.bounds_q;

  report.bound_gap_lower = std::abs(bq.lower.value - bp.lower.value);
  report.bound_gap_upper = std::abs(bq.upper.value - bp.upper.value);
  const double lp = bp.lower.report.optimizer_sup_norm;
  const double lq = bq.lower.report.optimizer_sup_norm;
  const double up = bp.upper.report.optimizer_sup_norm;
  const double uq = bq.upper.report.optimizer_sup_norm;
  report.optimizer_norm_p = std::max(lp, up);
  report.optimizer_norm_q = std::max(lq, uq);
  report.certificate_lower = 2.0 * report.delta * std::max(lp, lq);
  report.certificate_upper = 2.0 * report.delta * std::max(up, uq);
  report.certificate = std::max(report.certificate_lower, report.certificate_upper);
  report.within_certificate =
      report.bound_gap_lower <= report.certificate_lower + kCertificateTolerance &&
      report.bound_gap_upper <= report.certificate_upper + kCertificateTolerance;
  report.notes.push_back(
      "certificate uses the computed optimizers; uniform boundedness over the model class is "
      "assumed, not verified");
  if (!bp.lower.report.converged || !bp.upper.report.converged || !bq.lower.report.converged ||
      !bq.upper.report.converged) {
    report.notes.push_back("at least one solve stopped before reaching the gradient tolerance");
  }
  return report;
}

double label_model_score(const DatasetView& data, const LabelModel& model, const GMatrix& g) {
  if (data.n() == 0) throw InsufficientSampleError("no samples");
  if (static_cast<std::size_t>(g.rows()) != data.n() || g.cols() != model.num_classes()) {
    throw ArgumentError("G shape does not match data and label model");
  }
  const Eigen::MatrixXd probs = model.aligned(*data.signatures);
  double total = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    total += g.values().row(static_cast<Eigen::Index>(i)).dot(
        probs.col(static_cast<Eigen::Index>(data.z_ids[i])));
  }
  return total / static_cast<double>(data.n());
}

const char* to_string(SelectionStrategy s) {
  switch (s) {
    case SelectionStrategy::lower:
      return "lower";
    case SelectionStrategy::upper:
      return "upper";
    case SelectionStrategy::average:
      return "average";
    case SelectionStrategy::label_model:
      return "label_model";
  }
  return "unknown";
}

SelectionStrategy parse_selection_strategy(const std::string& name) {
  if (name == "lower") return SelectionStrategy::lower;
  if (name == "upper") return SelectionStrategy::upper;
  if (name == "average") return SelectionStrategy::average;
  if (name == "label_model" || name == "label-model") return SelectionStrategy::label_model;
  throw ArgumentError("unknown selection strategy '" + name + "'");
}

SelectionResult select_model(const std::vector<SelectionCandidate>& candidates,
                             SelectionStrategy strategy) {
  if (candidates.empty()) throw ArgumentError("no candidates to select from");
  SelectionResult result;
  result.strategy = strategy;
  for (const auto& c : candidates) {
    switch (strategy) {
      case SelectionStrategy::lower:
        result.scores.push_back(c.lower);
        break;
      case SelectionStrategy::upper:
        result.scores.push_back(c.upper);
        break;
      case SelectionStrategy::average:
        result.scores.push_back(0.5 * (c.lower + c.upper));
        break;
      case SelectionStrategy::label_model:
        result.scores.push_back(c.label_model_score);
        break;
    }
  }
  for (std::size_t i = 1; i < result.scores.size(); ++i) {
    if (result.scores[i] > result.scores[result.chosen_index]) result.chosen_index = i;
  }
  return result;
}

}  // namespace frechet
