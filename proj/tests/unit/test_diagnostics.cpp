#include <cmath>

#include "doctest.h"
#include "frechet/diagnostics.hpp"
#include "frechet/metrics.hpp"
#include "frechet/oracle.hpp"
#include "support/fixtures.hpp"

using namespace frechet;

namespace {

double tv(std::vector<double> p, std::vector<double> q) { return tv_distance(p, q); }

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("total variation examples") {
    CHECK(tv({0.5, 0.5}, {0.75, 0.25}) == doctest::Approx(0.25));
    CHECK(tv({0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}) == 0.0);
    CHECK(tv({1, 0}, {0, 1}) == 1.0);
    CHECK_THROWS_AS(tv({1, 0}, {1, 0, 0}), ArgumentError);
  }

  TEST_CASE("conditional entropy examples") {
    Eigen::MatrixXd hot(2, 2);
    hot << 1, 0, 0, 1;
    Eigen::Vector2d w(0.3, 0.7);
    CHECK(conditional_entropy_y(hot, w) == 0.0);
    CHECK(conditional_entropy_y(Eigen::MatrixXd::Constant(2, 2, 0.5), w) == doctest::Approx(std::log(2.0)));
    Eigen::MatrixXd skew(2, 2);
    skew << 0.75, 0.75, 0.25, 0.25;
    CHECK(conditional_entropy_y(skew, w) == doctest::Approx(0.562335).epsilon(1e-6));
    CHECK_THROWS_AS(conditional_entropy_y(skew, Eigen::Vector2d(0.5, 0.6)), ArgumentError);
  }

  TEST_CASE("entropy from a dataset uses signature frequencies") {
    DatasetView d = testing::dataset_from_ids({0, 0, 0, 1});
    LabelModel m(2);
    m.set_row({0}, {0.5, 0.5});
    m.set_row({1}, {1.0, 0.0});
    CHECK(signature_frequencies(d)(0) == 0.75);
    CHECK(conditional_entropy_y(m, d) == doctest::Approx(0.75 * std::log(2.0)));
  }

  TEST_CASE("discrete X entropy") {
    DatasetView d = testing::dataset_from_ids({0, 0, 1, 1});
    CHECK(conditional_entropy_x(d, {0, 1, 2, 2}) == doctest::Approx(0.5 * std::log(2.0)));
  }

  TEST_CASE("informativeness bound examples") {
    CHECK(informativeness_bound(1.0, 0.0) == 0.0);
    CHECK(informativeness_bound(1.0, std::log(2.0)) == doctest::Approx(2.35482).epsilon(1e-5));
    CHECK_THROWS_AS(informativeness_bound(-1.0, 0.1), ArgumentError);
  }

  TEST_CASE("informativeness bound dominates the oracle width") {
    Rng rng(79);
    for (int t = 0; t < 100; ++t) {
      const int k = 2 + static_cast<int>(rng.below(2));
      auto inst = testing::random_instance(rng, 20, k, 4);
      auto r = exact_bounds(inst.data, inst.model, inst.g);
      const double bound = informativeness_bound(inst.g.sup_norm(), conditional_entropy_y(inst.model, inst.data));
      CHECK(r.upper - r.lower <= bound + 1e-9);
    }
  }

  TEST_CASE("label-model score") {
    DatasetView d = testing::dataset_from_ids({0, 1, 1});
    d.predictions = std::vector<int>{1, 0, 1};
    LabelModel hot(2);
    hot.set_row({0}, {0.0, 1.0});
    hot.set_row({1}, {1.0, 0.0});
    GMatrix g = build_g(d, {MetricKind::accuracy, {}, {}, {}}, LabelSpace(2));
    CHECK(label_model_score(d, hot, g) == doctest::Approx(2.0 / 3));
    LabelModel flat(2);
    flat.set_row({0}, {0.5, 0.5});
    flat.set_row({1}, {0.5, 0.5});
    CHECK(label_model_score(d, flat, g) == 0.5);

    Rng rng(83);
    for (int t = 0; t < 50; ++t) {
      auto inst = testing::random_instance(rng, 20, 3, 4);
      auto r = exact_bounds(inst.data, inst.model, inst.g);
      const double s = label_model_score(inst.data, inst.model, inst.g);
      CHECK(s >= r.lower - 1e-9);
      CHECK(s <= r.upper + 1e-9);
    }
  }

  TEST_CASE("selection examples") {
    std::vector<SelectionCandidate> c{{0.6, 0.9, 0.0}, {0.7, 0.8, 0.0}};
    CHECK(select_model(c, SelectionStrategy::lower).chosen_index == 1);
    CHECK(select_model(c, SelectionStrategy::upper).chosen_index == 0);
    auto avg = select_model(c, SelectionStrategy::average);
    CHECK(avg.scores[0] == avg.scores[1]);
    CHECK(avg.chosen_index == 0);
    for (auto s : {SelectionStrategy::lower, SelectionStrategy::upper, SelectionStrategy::average,
                   SelectionStrategy::label_model}) {
      CHECK(select_model({{0.1, 0.2, 0.3}}, s).chosen_index == 0);
    }
    CHECK_THROWS_AS(select_model({}, SelectionStrategy::lower), ArgumentError);
    CHECK(parse_selection_strategy("label-model") == SelectionStrategy::label_model);
  }

  TEST_CASE("appending a dominated candidate never changes the choice") {
    Rng rng(89);
    for (int t = 0; t < 100; ++t) {
      std::vector<SelectionCandidate> c;
      for (int i = 0; i < 4; ++i) {
        const double lo = rng.uniform();
        c.push_back({lo, lo + rng.uniform(), rng.uniform()});
      }
      for (auto s : {SelectionStrategy::lower, SelectionStrategy::upper, SelectionStrategy::average,
                     SelectionStrategy::label_model}) {
        const auto before = select_model(c, s).chosen_index;
        auto extended = c;
        extended.push_back({c[before].lower - 0.01, c[before].lower - 0.005, -1.0});
        CHECK(select_model(extended, s).chosen_index == before);
      }
    }
  }

  TEST_CASE("misspecification: identical models") {
    Rng rng(97);
    auto inst = testing::random_instance(rng, 30, 2, 4);
    auto r = misspecification_report(inst.data, inst.model, inst.model, inst.g, {0.05, 1.0}, SolverConfig{});
    CHECK(r.delta == 0.0);
    CHECK(r.bound_gap_lower <= 1e-6);
    CHECK(r.bound_gap_upper <= 1e-6);
    CHECK(r.within_certificate);
  }

  TEST_CASE("misspecification: mixing toward uniform stays within the certificate") {
    Rng rng(101);
    for (int t = 0; t < 20; ++t) {
      auto inst = testing::random_instance(rng, 30, 2, 3);
      const double mix = rng.uniform();
      LabelModel q(2);
      double delta = 0.0;
      for (const auto& [z, row] : inst.model.rows()) {
        q.set_row(z, {(1 - mix) * row[0] + mix * 0.5, (1 - mix) * row[1] + mix * 0.5});
        delta = std::max(delta, mix * std::abs(row[1] - 0.5));
      }
      auto r = misspecification_report(inst.data, inst.model, q, inst.g, {0.05, 1.0}, SolverConfig{});
      CHECK(r.delta == doctest::Approx(delta).epsilon(1e-12));
      CHECK(r.bound_gap_lower <= r.certificate_lower + 1e-5);
      CHECK(r.bound_gap_upper <= r.certificate_upper + 1e-5);
      CHECK(r.within_certificate);
    }
  }

  TEST_CASE("misspecification: one-hot versus uniform on the two-point fixture") {
    auto hot = testing::two_point(1.0);
    auto flat = testing::two_point(0.5);
    const double eps = 1e-3 / std::log(2.0);
    auto r = misspecification_report(hot.data, hot.model, flat.model, hot.g, {eps, 1.0}, SolverConfig{});
    auto oh = exact_bounds(hot.data, hot.model, hot.g);
    auto of = exact_bounds(flat.data, flat.model, flat.g);
    const double tol = 2 * eps * std::log(2.0) + 1e-5;
    CHECK(r.delta == doctest::Approx(0.5));
    CHECK(std::abs(r.bound_gap_lower - std::abs(of.lower - oh.lower)) <= tol);
    CHECK(std::abs(r.bound_gap_upper - std::abs(of.upper - oh.upper)) <= tol);
  }
}
