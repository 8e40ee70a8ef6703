#include "frechet/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "frechet/random.hpp"

namespace frechet {

BoundEstimate estimate_bound(const DualProblem& problem, const SmoothingConfig& cfg,
                             const SolverConfig& scfg, ObjectiveSide side) {
  cfg.validate();
  if (problem.n() == 0) throw InsufficientSampleError("no samples");
  // The lower bound is a supremum: minimize the negated penalized objective.
  const double sign = side == ObjectiveSide::upper ? 1.0 : -1.0;
  const ValueFn value = [&](const DualVariables& a) {
    return sign * problem.penalized(a, cfg, side);
  };
  const GradientFn grad = [&](const DualVariables& a) { return problem.gradient(a, cfg, side); };
  const DualVariables a0 = DualVariables::Zero(problem.num_classes(), problem.num_signatures());

  auto [a_hat, report] = minimize(value, grad, a0, scfg);

  BoundEstimate est;
  est.side = side;
  est.optimizer = center_columns(a_hat);
  est.value = problem.objective(est.optimizer, cfg, side);
  est.n = problem.n();
  est.epsilon = cfg.epsilon;
  est.plugin_std = problem.n() >= 2 ? plugin_std(problem, est.optimizer, cfg, side) : 0.0;
  report.optimizer_sup_norm = est.optimizer.size() > 0 ? est.optimizer.lpNorm<Eigen::Infinity>() : 0.0;
  est.report = report;
  return est;
}

BoundPair estimate_bounds(const DualProblem& problem, const SmoothingConfig& cfg,
                          const SolverConfig& scfg) {
  return {estimate_bound(problem, cfg, scfg, ObjectiveSide::lower),
          estimate_bound(problem, cfg, scfg, ObjectiveSide::upper)};
}

BoundPair estimate_bounds(const DatasetView& data, const LabelModel& model, const GMatrix& g,
                          const SmoothingConfig& cfg, const SolverConfig& scfg) {
  return estimate_bounds(DualProblem(data, model, g), cfg, scfg);
}

double plugin_std(const DualProblem& problem, const DualVariables& a_hat,
                  const SmoothingConfig& cfg, ObjectiveSide side) {
  if (problem.n() < 2) throw InsufficientSampleError("plug-in std needs at least two samples");
  if (!a_hat.allFinite()) throw ArgumentError("optimizer must be finite");
  const Eigen::VectorXd values = problem.per_sample(a_hat, cfg, side);
  const double mean = values.mean();
  const double ss = (values.array() - mean).square().sum();
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double plugin_std(const DatasetView& data, const LabelModel& model, const GMatrix& g,
                  const DualVariables& a_hat, const SmoothingConfig& cfg, ObjectiveSide side) {
  return plugin_std(DualProblem(data, model, g), a_hat, cfg, side);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("quantile level must lie in (0, 1)");
  // Acklam's rational approximation (relative error ~1e-9) followed by one
  // Halley step against erfc, which brings it to machine precision.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

ConfidenceInterval confidence_interval(double value, double std, std::size_t n, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ArgumentError("gamma must lie in (0, 1)");
  if (n < 2) throw InsufficientSampleError("confidence interval needs n >= 2");
  if (!(std >= 0.0)) throw ArgumentError("standard deviation must be non-negative");
  const double tau = normal_quantile(1.0 - gamma / 2.0);
  const double half = tau * std / std::sqrt(static_cast<double>(n));
  return {1.0 - gamma, value - half, value + half};
}

ConfidenceInterval confidence_interval(const BoundEstimate& est, double gamma) {
  return confidence_interval(est.value, est.plugin_std, est.n, gamma);
}

double estimate_class_prior(const DatasetView& data, const LabelModel& model, int positive_class) {
  if (positive_class < 0 || positive_class >= model.num_classes()) {
    throw ArgumentError("positive class out of range");
  }
  if (data.n() == 0) throw InsufficientSampleError("no samples");
  const Eigen::MatrixXd probs = model.aligned(*data.signatures);
  double total = 0.0;
  for (auto z : data.z_ids) total += probs(positive_class, static_cast<Eigen::Index>(z));
  return std::clamp(total / static_cast<double>(data.n()), 0.0, 1.0);
}

DatasetView subsample_for_bounds(const DatasetView& data, std::size_t n_target,
                                 std::uint64_t seed) {
  if (n_target > data.n()) throw ArgumentError("subsample larger than the dataset");
  if (n_target < 2) throw ArgumentError("bounds need at least two samples");
  std::vector<std::size_t> rows(data.n());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng(seed);
  // Partial Fisher-Yates over the first n_target slots.
  for (std::size_t i = 0; i < n_target && n_target < data.n(); ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(data.n() - i));
    std::swap(rows[i], rows[j]);
  }
  rows.resize(n_target);
  std::sort(rows.begin(), rows.end());
  return data.select(rows);
}

}  // namespace frechet
