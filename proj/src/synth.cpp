#include "frechet/synth.hpp"

#include <cmath>
#include <limits>

#include "frechet/random.hpp"

namespace frechet {

namespace {

constexpr std::size_t kMaxExactLabelers = 12;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// P(z_j = v | Y = y) for one labeler.
double emission(double accuracy, double abstain, int v, int y) {
  if (v == kAbstain) return abstain;
  return (1.0 - abstain) * (v == y ? accuracy : 1.0 - accuracy);
}

}  // namespace

void SynthSpec::validate() const {
  if (n < 1) throw ArgumentError("synthetic dataset needs n >= 1");
  if (labeler_accuracies.empty()) throw ArgumentError("need at least one weak labeler");
  if (!abstain_rates.empty() && abstain_rates.size() != labeler_accuracies.size()) {
    throw ArgumentError("abstain_rates must match labeler_accuracies in length");
  }
  for (double a : labeler_accuracies) {
    if (!is_probability(a)) throw ArgumentError("labeler accuracy outside [0, 1]");
  }
  for (double a : abstain_rates) {
    if (!is_probability(a)) throw ArgumentError("abstain rate outside [0, 1]");
  }
  if (!is_probability(prior_y1)) throw ArgumentError("prior_y1 outside [0, 1]");
  if (!std::isfinite(score_separation)) throw ArgumentError("score separation must be finite");
  if (!std::isfinite(threshold)) throw ArgumentError("threshold must be finite");
}

LabelModel exact_label_model(const SynthSpec& spec) {
  spec.validate();
  const std::size_t k = spec.num_labelers();
  if (k > kMaxExactLabelers) throw ArgumentError("too many labelers for the exact label model");
  LabelModel model(2);
  std::size_t total = 1;
  for (std::size_t j = 0; j < k; ++j) total *= 3;
  WeakSignature sig(k);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    for (std::size_t j = 0; j < k; ++j) {
      sig[j] = static_cast<int>(rest % 3) - 1;
      rest /= 3;
    }
    double like0 = 1.0 - spec.prior_y1;
    double like1 = spec.prior_y1;
    for (std::size_t j = 0; j < k; ++j) {
      like0 *= emission(spec.labeler_accuracies[j], spec.abstain_rate(j), sig[j], 0);
      like1 *= emission(spec.labeler_accuracies[j], spec.abstain_rate(j), sig[j], 1);
    }
    const double evidence = like0 + like1;
    if (!(evidence > 0.0)) continue;  // signature cannot occur
    model.set_row(sig, {like0 / evidence, like1 / evidence});
  }
  return model;
}

TrueMetrics realized_metrics(const DatasetView& data, double threshold) {
  if (!data.labels || !data.scores) throw ArgumentError("realized metrics need scores and labels");
  const double n = static_cast<double>(data.n());
  double correct = 0;
  double both = 0;
  double h1 = 0;
  double y1 = 0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const int h = (*data.scores)[i] >= threshold ? 1 : 0;
    const int y = (*data.labels)[i];
    correct += h == y;
    both += h == 1 && y == 1;
    h1 += h == 1;
    y1 += y == 1;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  TrueMetrics t;
  t.accuracy = correct / n;
  t.joint_positive = both / n;
  t.p_h1 = h1 / n;
  t.p_y1 = y1 / n;
  t.precision = h1 > 0 ? both / h1 : nan;
  t.recall = y1 > 0 ? both / y1 : nan;
  t.f1 = h1 + y1 > 0 ? 2.0 * both / (h1 + y1) : nan;
  return t;
}

SynthOutput generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const std::size_t k = spec.num_labelers();
  Rng rng(spec.seed);

  std::vector<WeakSignature> raw;
  std::vector<double> scores;
  std::vector<int> preds;
  std::vector<int> labels;
  raw.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const int y = rng.bernoulli(spec.prior_y1) ? 1 : 0;
    WeakSignature sig(k);
    for (std::size_t j = 0; j < k; ++j) {
      if (rng.bernoulli(spec.abstain_rate(j))) {
        sig[j] = kAbstain;
      } else {
        sig[j] = rng.bernoulli(spec.labeler_accuracies[j]) ? y : 1 - y;
      }
    }
    const double logit = (y == 1 ? 0.5 : -0.5) * spec.score_separation + rng.normal();
    const double score = 1.0 / (1.0 + std::exp(-logit));
    raw.push_back(std::move(sig));
    scores.push_back(score);
    preds.push_back(score >= spec.threshold ? 1 : 0);
    labels.push_back(y);
  }

  auto encoded = encode_signatures(raw);
  SynthOutput out{DatasetView{}, exact_label_model(spec), TrueMetrics{}};
  out.data.signatures = std::move(encoded.table);
  out.data.z_ids = std::move(encoded.ids);
  out.data.scores = std::move(scores);
  out.data.predictions = std::move(preds);
  out.data.labels = std::move(labels);
  out.truth = realized_metrics(out.data, spec.threshold);
  return out;
}

void CoverageSpec::validate() const {
  if (replications < 100) throw ArgumentError("coverage experiment needs at least 100 replications");
  if (n < 2) throw ArgumentError("coverage experiment needs n >= 2");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ArgumentError("gamma must lie in (0, 1)");
  if (reference_multiplier < 100) throw ArgumentError("reference run must use at least 100 n");
  if (metric != MetricKind::accuracy && metric != MetricKind::joint_positive) {
    throw ArgumentError("coverage experiment supports accuracy and joint_positive");
  }
  generator.validate();
}

CoverageReport coverage_experiment(const CoverageSpec& spec, const SolverConfig& scfg) {
  spec.validate();
  const SmoothingConfig cfg =
      spec.epsilon ? SmoothingConfig{*spec.epsilon, 1.0} : SmoothingConfig::defaults_for(2);
  const LabelSpace space(2);
  MetricSpec metric;
  metric.kind = spec.metric;
  metric.threshold = spec.generator.threshold;

  auto run = [&](std::size_t n, std::uint64_t seed) {
    SynthSpec gen = spec.generator;
    gen.n = n;
    gen.seed = seed;
    const SynthOutput s = generate_synthetic(gen);
    return estimate_bounds(s.data, s.exact_model, build_g(s.data, metric, space), cfg, scfg);
  };

  CoverageReport report;
  report.replications = spec.replications;
  report.n = spec.n;
  report.reference_n = spec.reference_multiplier * spec.n;
  report.gamma = spec.gamma;
  report.epsilon = cfg.epsilon;

  const BoundPair reference = run(report.reference_n, derive_seed(spec.seed, 0));
  report.lower.reference = reference.lower.value;
  report.upper.reference = reference.upper.value;

  std::size_t hits_lower = 0;
  std::size_t hits_upper = 0;
  for (std::size_t r = 0; r < spec.replications; ++r) {
    const BoundPair b = run(spec.n, derive_seed(spec.seed, r + 1));
    const auto ci_l = confidence_interval(b.lower, spec.gamma);
    const auto ci_u = confidence_interval(b.upper, spec.gamma);
    hits_lower += ci_l.low <= report.lower.reference && report.lower.reference <= ci_l.high;
    hits_upper += ci_u.low <= report.upper.reference && report.upper.reference <= ci_u.high;
    report.lower.mean_estimate += b.lower.value;
    report.upper.mean_estimate += b.upper.value;
    report.lower.mean_half_width += 0.5 * (ci_l.high - ci_l.low);
    report.upper.mean_half_width += 0.5 * (ci_u.high - ci_u.low);
    report.lower.unconverged += !b.lower.report.converged;
    report.upper.unconverged += !b.upper.report.converged;
  }
  const double reps = static_cast<double>(spec.replications);
  for (auto* side : {&report.lower, &report.upper}) {
    side->mean_estimate /= reps;
    side->mean_half_width /= reps;
  }
  report.lower.coverage = static_cast<double>(hits_lower) / reps;
  report.upper.coverage = static_cast<double>(hits_upper) / reps;
  for (auto* side : {&report.lower, &report.upper}) {
    side->std_error = std::sqrt(side->coverage * (1.0 - side->coverage) / reps);
  }
  return report;
}

}  // namespace frechet
