#include <cmath>

#include "doctest.h"
#include "frechet/bounds.hpp"
#include "frechet/metrics.hpp"
#include "support/fixtures.hpp"

using namespace frechet;

namespace {

DatasetView with_predictions(std::vector<int> ids, std::vector<int> preds) {
  DatasetView d = testing::dataset_from_ids(ids);
  d.predictions = std::move(preds);
  return d;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("metric names") {
    CHECK(parse_metric_kind("joint-positive") == MetricKind::joint_positive);
    CHECK(std::string(to_string(MetricKind::accuracy)) == "accuracy");
    CHECK_THROWS_AS(parse_metric_kind("auc"), ArgumentError);
  }

  TEST_CASE("build_g rows") {
    DatasetView d = with_predictions({0, 0}, {1, 0});
    LabelSpace two(2);
    GMatrix acc = build_g(d, {MetricKind::accuracy, {}, {}, {}}, two);
    CHECK(acc.values().row(0) == Eigen::RowVector2d(0, 1));
    CHECK(acc.values().row(1) == Eigen::RowVector2d(1, 0));

    GMatrix joint = build_g(d, {MetricKind::joint_positive, {}, {}, {}}, two);
    CHECK(joint.values().row(0) == Eigen::RowVector2d(0, 1));
    CHECK(joint.values().row(1) == Eigen::RowVector2d(0, 0));

    Eigen::Matrix2d loss;
    loss << 0, 1, 1, 0;
    GMatrix risk = build_g(d, {MetricKind::risk, loss, {}, {}}, two);
    CHECK((risk.values() + acc.values()) == Eigen::MatrixXd::Ones(2, 2));
    CHECK(risk.sup_norm() == 1.0);
  }

  TEST_CASE("build_g errors") {
    DatasetView d = with_predictions({0}, {0});
    CHECK_THROWS_AS(build_g(d, {MetricKind::joint_positive, {}, {}, {}}, LabelSpace(3)), ArgumentError);
    CHECK_THROWS_AS(build_g(d, {MetricKind::risk, {}, {}, {}}, LabelSpace(2)), ArgumentError);
    DatasetView bare = testing::dataset_from_ids({0});
    CHECK_THROWS_AS(build_g(bare, {MetricKind::accuracy, {}, {}, {}}, LabelSpace(2)), FormatError);
  }

  TEST_CASE("custom metric callback") {
    DatasetView d = testing::dataset_from_ids({0, 0, 0});
    MetricSpec spec;
    spec.kind = MetricKind::custom;
    spec.custom = [](std::size_t i, int y) { return 0.1 * static_cast<double>(i) + y; };
    GMatrix g = build_g(d, spec, LabelSpace(2));
    CHECK(g.values()(2, 1) == doctest::Approx(1.2));
  }

  TEST_CASE("estimate_h1 examples") {
    CHECK(estimate_h1(with_predictions({0, 0, 0, 0}, {1, 0, 1, 1}), std::nullopt) == 0.75);
    CHECK(estimate_h1(with_predictions({0, 0}, {0, 0}), std::nullopt) == 0.0);
    DatasetView s = testing::dataset_from_ids({0, 0});
    s.scores = std::vector<double>{0.2, 0.6};
    CHECK(estimate_h1(s, 0.5) == 0.5);
    CHECK(estimate_h1(s, 0.6) == 0.5);  // ties classify positive
  }

  TEST_CASE("prf arithmetic examples") {
    PRFBounds p = prf_from_joint(0.2, 0.0, 0.3, 0.0, 0.5, 0.4);
    CHECK(p.precision.lower == doctest::Approx(0.4));
    CHECK(p.recall.lower == doctest::Approx(0.5));
    CHECK(p.f1.lower == doctest::Approx(0.44444).epsilon(1e-5));
    PRFBounds zero = prf_from_joint(0.0, 0.0, 0.3, 0.0, 0.5, 0.4);
    CHECK(zero.precision.lower == 0.0);
    CHECK(zero.recall.lower == 0.0);
    CHECK(zero.f1.lower == 0.0);
    PRFBounds big = prf_from_joint(0.1, 0.0, 0.75, 0.0, 0.5, 0.9);
    CHECK(big.precision.upper == 1.0);
    CHECK(big.precision.upper_clamped);
    CHECK_FALSE(big.recall.upper_clamped);
    CHECK_THROWS_AS(prf_from_joint(0.1, 0, 0.2, 0, 0.0, 0.5), DegenerateDenominatorError);
    CHECK_THROWS_AS(prf_from_joint(0.1, 0, 0.2, 0, 0.5, 0.0), DegenerateDenominatorError);
  }

  TEST_CASE("prf is homogeneous before clamping") {
    PRFBounds a = prf_from_joint(0.05, 0.1, 0.2, 0.1, 0.6, 0.7);
    PRFBounds b = prf_from_joint(0.10, 0.1, 0.2, 0.1, 0.6, 0.7);
    CHECK(b.precision.lower == doctest::Approx(2 * a.precision.lower));
    CHECK(b.recall.lower == doctest::Approx(2 * a.recall.lower));
    CHECK(b.f1.lower == doctest::Approx(2 * a.f1.lower));
  }

  TEST_CASE("accuracy bounds stay in range and one-hot models pin the value") {
    Rng rng(43);
    for (int t = 0; t < 20; ++t) {
      const int k = 2 + static_cast<int>(rng.below(2));
      auto inst = testing::random_instance(rng, 30, k, 4);
      std::vector<int> preds(30);
      for (auto& p : preds) p = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
      inst.data.predictions = preds;
      GMatrix g = build_g(inst.data, {MetricKind::accuracy, {}, {}, {}}, LabelSpace(k));
      SmoothingConfig cfg = SmoothingConfig::defaults_for(k);
      auto b = estimate_bounds(inst.data, inst.model, g, cfg, SolverConfig{});
      CHECK(b.lower.value >= -1e-9);
      CHECK(b.upper.value <= 1.0 + cfg.epsilon * std::log(k) + 1e-9);

      LabelModel hot(k);
      std::vector<int> implied(inst.data.num_signatures());
      for (std::size_t z = 0; z < implied.size(); ++z) {
        implied[z] = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
        std::vector<double> row(static_cast<std::size_t>(k), 0.0);
        row[static_cast<std::size_t>(implied[z])] = 1.0;
        hot.set_row(inst.data.signatures->decode(z), row);
      }
      double agree = 0.0;
      for (std::size_t i = 0; i < 30; ++i) agree += preds[i] == implied[inst.data.z_ids[i]];
      agree /= 30.0;
      auto bh = estimate_bounds(inst.data, hot, g, cfg, SolverConfig{});
      const double tol = cfg.epsilon * std::log(k) + 1e-5;
      CHECK(std::abs(bh.lower.value - agree) <= tol);
      CHECK(std::abs(bh.upper.value - agree) <= tol);
    }
  }

  TEST_CASE("threshold sweep structure") {
    auto inst = testing::two_point(0.75);
    inst.data.scores = std::vector<double>{0.2, 0.8};
    const SmoothingConfig cfg{1e-3 / std::log(2.0), 1.0};
    auto table = threshold_sweep(inst.data, inst.model, {0.25, 0.75},
                                 {MetricKind::accuracy, MetricKind::joint_positive}, cfg, SolverConfig{});
    REQUIRE(table.size() == 10);
    CHECK(table[0].metric == "accuracy");
    CHECK(table[1].metric == "joint_positive");
    CHECK(table[2].metric == "precision");
    CHECK(table[5].threshold == 0.75);
    // Each row reproduces an independent solve.
    for (double t : {0.25, 0.75}) {
      MetricSpec spec{MetricKind::accuracy, {}, t, {}};
      auto b = estimate_bounds(inst.data, inst.model, build_g(inst.data, spec, LabelSpace(2)), cfg, SolverConfig{});
      const auto& row = table[t == 0.25 ? 0 : 5];
      CHECK(row.lower == doctest::Approx(std::clamp(b.lower.value, 0.0, 1.0)).epsilon(1e-14));
      CHECK(row.upper == doctest::Approx(std::clamp(b.upper.value, 0.0, 1.0)).epsilon(1e-14));
    }
  }

  TEST_CASE("sweep extremes") {
    auto inst = testing::two_point(0.75);
    inst.data.scores = std::vector<double>{0.2, 0.8};
    const SmoothingConfig cfg{1e-3 / std::log(2.0), 1.0};
    // Threshold above every score: h = 0, joint bounds vanish, no precision row.
    auto high = threshold_sweep(inst.data, inst.model, {0.9}, {MetricKind::joint_positive}, cfg, SolverConfig{});
    REQUIRE(high.size() == 3);
    // Zero G: the smoothed bounds sit eps (ln 2 - H(row)) off zero, on opposite sides.
    const double gap = cfg.epsilon * (std::log(2.0) + 0.75 * std::log(0.75) + 0.25 * std::log(0.25));
    CHECK(high[0].lower == doctest::Approx(gap).epsilon(1e-9));
    CHECK(high[0].upper == doctest::Approx(-gap).epsilon(1e-9));
    CHECK(high[1].metric == "recall");
    // Threshold below every score: h = 1, recall = joint / P(Y=1).
    auto low = threshold_sweep(inst.data, inst.model, {0.1}, {MetricKind::joint_positive}, cfg, SolverConfig{});
    REQUIRE(low.size() == 4);
    CHECK(low[2].metric == "recall");
    CHECK(low[2].upper == doctest::Approx(std::clamp(low[0].upper / 0.75, 0.0, 1.0)).epsilon(1e-14));
    CHECK(low[2].lower <= low[2].upper);
    CHECK(low[2].lower >= 1.0 - cfg.epsilon * std::log(2.0) / 0.75);
    CHECK_THROWS_AS(threshold_sweep(inst.data, inst.model, {}, {MetricKind::accuracy}, cfg, SolverConfig{}),
                    ArgumentError);
  }
}
