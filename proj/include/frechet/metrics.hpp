#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "frechet/bounds.hpp"

namespace frechet {

enum class MetricKind { risk, accuracy, joint_positive, custom };

const char* to_string(MetricKind kind);
MetricKind parse_metric_kind(const std::string& name);

struct MetricSpec {
  MetricKind kind = MetricKind::accuracy;
  // Risk: entry (ŷ, y) = ℓ(ŷ, y).
  std::optional<Eigen::MatrixXd> loss_table;
  // Binarizes scores with h = 1[score >= threshold].
  std::optional<double> threshold;
  // Custom: g(i, y) for sample i.
  std::function<double(std::size_t, int)> custom;
};

// h(X_i) from explicit predictions, or from scores and a threshold.
std::vector<int> predicted_classes(const DatasetView& data, std::optional<double> threshold);

GMatrix build_g(const DatasetView& data, const MetricSpec& spec, const LabelSpace& space);

// Fraction of samples with h = 1.
double estimate_h1(const DatasetView& data, std::optional<double> threshold);

struct RatioBound {
  double lower = 0.0;
  double upper = 0.0;
  double lower_std = 0.0;
  double upper_std = 0.0;
  bool lower_clamped = false;
  bool upper_clamped = false;

  bool clamped() const { return lower_clamped || upper_clamped; }
};

struct PRFBounds {
  RatioBound precision;
  RatioBound recall;
  RatioBound f1;
  double p_hat_h1 = 0.0;
  double p_hat_y1 = 0.0;
};

// Precision, recall and F1 bounds from bounds on P(h = 1, Y = 1).
PRFBounds prf_from_joint(const BoundEstimate& lower, const BoundEstimate& upper, double p_h1,
                         double p_y1);
PRFBounds prf_from_joint(double lower, double lower_std, double upper, double upper_std,
                         double p_h1, double p_y1);

struct SweepRow {
  double threshold = 0.0;
  std::string metric;
  double lower = 0.0;
  double upper = 0.0;
  double lower_std = 0.0;
  double upper_std = 0.0;
  ConfidenceInterval ci_lower;
  ConfidenceInterval ci_upper;
  bool clamped = false;
  std::size_t n = 0;
};

using SweepTable = std::vector<SweepRow>;

struct SweepOptions {
  double gamma = 0.05;
  // P(Y = 1); estimated from the label model when absent.
  std::optional<double> prior_y1;
};

// For each threshold t (in the given order), h_t = 1[score >= t]. Accuracy yields
// one row per threshold; joint_positive yields precision, recall and f1 rows.
SweepTable threshold_sweep(const DatasetView& data, const LabelModel& model,
                           const std::vector<double>& thresholds,
                           const std::vector<MetricKind>& kinds, const SmoothingConfig& cfg,
                           const SolverConfig& scfg, const SweepOptions& options = {});

}  // namespace frechet
