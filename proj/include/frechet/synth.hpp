#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "frechet/bounds.hpp"
#include "frechet/metrics.hpp"

namespace frechet {

// Binary task; weak labels are conditionally independent given Y.
struct SynthSpec {
  std::size_t n = 1000;
  std::vector<double> labeler_accuracies{0.8, 0.7, 0.65};
  std::vector<double> abstain_rates;  // empty = never abstain
  double prior_y1 = 0.5;
  // Class-conditional logits are N(±separation/2, 1); score = sigmoid(logit).
  double score_separation = 2.0;
  double threshold = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t num_labelers() const { return labeler_accuracies.size(); }
  double abstain_rate(std::size_t j) const { return abstain_rates.empty() ? 0.0 : abstain_rates[j]; }
};

// Realized metrics of h = 1[score >= threshold] against the sampled labels.
// Ratios whose denominator is zero are NaN.
struct TrueMetrics {
  double accuracy = 0.0;
  double joint_positive = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double p_h1 = 0.0;
  double p_y1 = 0.0;
};

struct SynthOutput {
  DatasetView data;  // scores, predictions and labels all present
  LabelModel exact_model;
  TrueMetrics truth;
};

// P(Y | Z) in closed form for every signature in {-1, 0, 1}^K.
LabelModel exact_label_model(const SynthSpec& spec);

SynthOutput generate_synthetic(const SynthSpec& spec);

TrueMetrics realized_metrics(const DatasetView& data, double threshold);

struct CoverageSpec {
  std::size_t replications = 500;
  std::size_t n = 2000;
  SynthSpec generator;  // its n and seed are overridden per run
  double gamma = 0.05;
  MetricKind metric = MetricKind::accuracy;
  std::optional<double> epsilon;
  std::size_t reference_multiplier = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CoverageSide {
  double reference = 0.0;  // bound from the single n0 = multiplier * n run
  double coverage = 0.0;
  double std_error = 0.0;  // binomial
  double mean_estimate = 0.0;
  double mean_half_width = 0.0;
  std::size_t unconverged = 0;
};

struct CoverageReport {
  std::size_t replications = 0;
  std::size_t n = 0;
  std::size_t reference_n = 0;
  double gamma = 0.0;
  double epsilon = 0.0;
  CoverageSide lower;
  CoverageSide upper;
};

CoverageReport coverage_experiment(const CoverageSpec& spec,
                                   const SolverConfig& scfg = SolverConfig{});

}  // namespace frechet
