#include "frechet/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace frechet {

const char* to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::risk:
      return "risk";
    case MetricKind::accuracy:
      return "accuracy";
    case MetricKind::joint_positive:
      return "joint_positive";
    case MetricKind::custom:
      return "custom";
  }
  return "unknown";
}

MetricKind parse_metric_kind(const std::string& name) {
  if (name == "risk") return MetricKind::risk;
  if (name == "accuracy") return MetricKind::accuracy;
  if (name == "joint-positive" || name == "joint_positive") return MetricKind::joint_positive;
  if (name == "custom") return MetricKind::custom;
  throw ArgumentError("unknown metric '" + name + "'");
}

std::vector<int> predicted_classes(const DatasetView& data, std::optional<double> threshold) {
  if (threshold) {
    if (!data.scores) throw FormatError("threshold given but the dataset has no scores");
    std::vector<int> out;
    out.reserve(data.n());
    for (double s : *data.scores) out.push_back(s >= *threshold ? 1 : 0);
    return out;
  }
  if (data.predictions) return *data.predictions;
  throw FormatError("dataset has neither predictions nor scores with a threshold");
}

GMatrix build_g(const DatasetView& data, const MetricSpec& spec, const LabelSpace& space) {
  const int k = space.num_classes();
  const auto n = static_cast<Eigen::Index>(data.n());
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n, k);

  if (spec.kind == MetricKind::custom) {
    if (!spec.custom) throw ArgumentError("custom metric needs a g(i, y) callback");
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int y = 0; y < k; ++y) values(i, y) = spec.custom(static_cast<std::size_t>(i), y);
    }
    return GMatrix(std::move(values));
  }
  if (spec.kind == MetricKind::joint_positive && k != 2) {
    throw ArgumentError("joint_positive needs a binary label space");
  }
  if (spec.kind == MetricKind::risk) {
    if (!spec.loss_table) throw ArgumentError("risk needs a loss table");
    if (spec.loss_table->rows() != k || spec.loss_table->cols() != k) {
      throw ArgumentError("loss table must be |Y| x |Y|");
    }
  }

  const std::vector<int> h = predicted_classes(data, spec.threshold);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int pred = h[static_cast<std::size_t>(i)];
    if (pred < 0 || pred >= k) throw FormatError("prediction out of range");
    switch (spec.kind) {
      case MetricKind::accuracy:
        values(i, pred) = 1.0;
        break;
      case MetricKind::risk:
        values.row(i) = spec.loss_table->row(pred);
        break;
      case MetricKind::joint_positive:
        values(i, 1) = pred == 1 ? 1.0 : 0.0;
        break;
      case MetricKind::custom:
        break;
    }
  }
  if (spec.kind == MetricKind::risk) {
    return GMatrix(std::move(values), spec.loss_table->cwiseAbs().maxCoeff());
  }
  return GMatrix(std::move(values), 1.0);
}

double estimate_h1(const DatasetView& data, std::optional<double> threshold) {
  const auto h = predicted_classes(data, threshold);
  if (h.empty()) throw InsufficientSampleError("no samples");
  const auto positives = std::count(h.begin(), h.end(), 1);
  return static_cast<double>(positives) / static_cast<double>(h.size());
}

namespace {

// factor * value / denom for both sides, clamped to [0, 1].
RatioBound ratio(double lower, double lower_std, double upper, double upper_std, double factor,
                 double denom) {
  RatioBound r;
  r.lower = factor * lower / denom;
  r.upper = factor * upper / denom;
  r.lower_std = factor * lower_std / denom;
  r.upper_std = factor * upper_std / denom;
  auto clamp = [](double& v, bool& flag) {
    const double c = std::clamp(v, 0.0, 1.0);
    flag = c != v;
    v = c;
  };
  clamp(r.lower, r.lower_clamped);
  clamp(r.upper, r.upper_clamped);
  if (r.lower > r.upper) {
    r.lower = r.upper;
    r.lower_clamped = true;
  }
  return r;
}

}  // namespace

PRFBounds prf_from_joint(double lower, double lower_std, double upper, double upper_std,
                         double p_h1, double p_y1) {
  if (!(p_h1 > 0.0) || !(p_y1 > 0.0)) {
    throw DegenerateDenominatorError("P(h=1) and P(Y=1) must be positive");
  }
  PRFBounds out;
  out.p_hat_h1 = p_h1;
  out.p_hat_y1 = p_y1;
  out.precision = ratio(lower, lower_std, upper, upper_std, 1.0, p_h1);
  out.recall = ratio(lower, lower_std, upper, upper_std, 1.0, p_y1);
  out.f1 = ratio(lower, lower_std, upper, upper_std, 2.0, p_h1 + p_y1);
  return out;
}

PRFBounds prf_from_joint(const BoundEstimate& lower, const BoundEstimate& upper, double p_h1,
                         double p_y1) {
  return prf_from_joint(lower.value, lower.plugin_std, upper.value, upper.plugin_std, p_h1, p_y1);
}

namespace {

SweepRow make_row(double t, const std::string& metric, const RatioBound& b, std::size_t n,
                  double gamma) {
  SweepRow row;
  row.threshold = t;
  row.metric = metric;
  row.lower = b.lower;
  row.upper = b.upper;
  row.lower_std = b.lower_std;
  row.upper_std = b.upper_std;
  row.ci_lower = confidence_interval(b.lower, b.lower_std, n, gamma);
  row.ci_upper = confidence_interval(b.upper, b.upper_std, n, gamma);
  row.clamped = b.clamped();
  row.n = n;
  return row;
}

}  // namespace

SweepTable threshold_sweep(const DatasetView& data, const LabelModel& model,
                           const std::vector<double>& thresholds,
                           const std::vector<MetricKind>& kinds, const SmoothingConfig& cfg,
                           const SolverConfig& scfg, const SweepOptions& options) {
  if (thresholds.empty()) throw ArgumentError("threshold sweep needs at least one threshold");
  if (kinds.empty()) throw ArgumentError("threshold sweep needs at least one metric");
  if (!data.scores) throw FormatError("threshold sweep needs scores");
  const LabelSpace space(model.num_classes());
  const std::size_t n = data.n();

  std::optional<double> p_y1 = options.prior_y1;
  SweepTable table;
  for (double t : thresholds) {
    for (MetricKind kind : kinds) {
      MetricSpec spec;
      spec.kind = kind;
      spec.threshold = t;
      if (kind != MetricKind::accuracy && kind != MetricKind::joint_positive) {
        throw ArgumentError(std::string("threshold sweep does not support metric ") + to_string(kind));
      }
      const GMatrix g = build_g(data, spec, space);
      const BoundPair b = estimate_bounds(data, model, g, cfg, scfg);

      if (kind == MetricKind::accuracy) {
        table.push_back(make_row(t, "accuracy",
                                 ratio(b.lower.value, b.lower.plugin_std, b.upper.value,
                                       b.upper.plugin_std, 1.0, 1.0),
                                 n, options.gamma));
        continue;
      }
      // Joint probability first, then whichever ratios have positive denominators.
      RatioBound joint{b.lower.value, b.upper.value, b.lower.plugin_std, b.upper.plugin_std};
      table.push_back(make_row(t, "joint_positive", joint, n, options.gamma));
      if (!p_y1) p_y1 = estimate_class_prior(data, model, 1);
      const double p_h1 = estimate_h1(data, t);
      auto emit = [&](const char* name, double denom, double factor) {
        if (!(denom > 0.0)) return;
        table.push_back(make_row(t, name,
                                 ratio(b.lower.value, b.lower.plugin_std, b.upper.value,
                                       b.upper.plugin_std, factor, denom),
                                 n, options.gamma));
      };
      emit("precision", p_h1, 1.0);
      emit("recall", *p_y1, 1.0);
      emit("f1", p_h1 + *p_y1, 2.0);
    }
  }
  return table;
}

}  // namespace frechet
