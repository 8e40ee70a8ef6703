#include <cmath>
#include <sstream>

#include "doctest.h"
#include "frechet/io.hpp"
#include "frechet/oracle.hpp"
#include "frechet/metrics.hpp"
#include "frechet/synth.hpp"

using namespace frechet;

TEST_SUITE("synth") {
  TEST_CASE("perfect labelers give a one-hot model and collapsed oracle bounds") {
    SynthSpec s;
    s.n = 300;
    s.labeler_accuracies = {1.0, 1.0};
    s.seed = 5;
    auto out = generate_synthetic(s);
    for (const auto& [z, row] : out.exact_model.rows()) {
      CHECK((row[0] == 1.0 || row[1] == 1.0));
    }
    MetricSpec acc{MetricKind::accuracy, {}, s.threshold, {}};
    auto r = exact_bounds(out.data, out.exact_model, build_g(out.data, acc, LabelSpace(2)));
    CHECK(r.lower == doctest::Approx(out.truth.accuracy).epsilon(1e-12));
    CHECK(r.upper == doctest::Approx(out.truth.accuracy).epsilon(1e-12));
  }

  TEST_CASE("uninformative labelers leave the prior") {
    SynthSpec s;
    s.labeler_accuracies = {0.5, 0.5, 0.5};
    s.abstain_rates = {0.1, 0.2, 0.0};
    s.prior_y1 = 0.3;
    const LabelModel m = exact_label_model(s);
    CHECK(m.rows().size() == 3 * 3 * 2);  // third labeler never abstains
    for (const auto& [z, row] : m.rows()) CHECK(row[1] == doctest::Approx(0.3).epsilon(1e-12));
  }

  TEST_CASE("exact model is the Bayes posterior") {
    SynthSpec s;
    s.labeler_accuracies = {0.8, 0.6};
    s.abstain_rates = {0.5, 0.0};
    s.prior_y1 = 0.4;
    const auto* row = exact_label_model(s).find({1, 0});
    REQUIRE(row != nullptr);
    const double like1 = 0.4 * 0.5 * 0.8 * 0.4;
    const double like0 = 0.6 * 0.5 * 0.2 * 0.6;
    CHECK((*row)[1] == doctest::Approx(like1 / (like0 + like1)).epsilon(1e-12));
  }

  TEST_CASE("deterministic per seed") {
    SynthSpec s;
    s.n = 200;
    s.seed = 77;
    std::ostringstream a, b;
    write_dataset_csv(a, generate_synthetic(s).data);
    write_dataset_csv(b, generate_synthetic(s).data);
    CHECK(a.str() == b.str());
    s.seed = 78;
    std::ostringstream c;
    write_dataset_csv(c, generate_synthetic(s).data);
    CHECK(a.str() != c.str());
  }

  TEST_CASE("realized metrics") {
    SynthSpec s;
    s.n = 500;
    s.seed = 3;
    auto out = generate_synthetic(s);
    const auto& t = out.truth;
    CHECK(t.precision == doctest::Approx(t.joint_positive / t.p_h1));
    CHECK(t.recall == doctest::Approx(t.joint_positive / t.p_y1));
    CHECK(t.f1 == doctest::Approx(2 * t.joint_positive / (t.p_h1 + t.p_y1)));
    CHECK(t.accuracy > 0.6);
  }

  TEST_CASE("generator config validation") {
    SynthSpec s;
    s.labeler_accuracies = {1.2};
    CHECK_THROWS_AS(s.validate(), ArgumentError);
    s.labeler_accuracies = {0.7, 0.7};
    s.abstain_rates = {0.1};
    CHECK_THROWS_AS(s.validate(), ArgumentError);
    CoverageSpec c;
    c.replications = 50;
    CHECK_THROWS_AS(c.validate(), ArgumentError);
  }

  TEST_CASE("small coverage run reports sane fields") {
    CoverageSpec c;
    c.replications = 100;
    c.n = 200;
    c.generator.labeler_accuracies = {0.8, 0.7};
    c.seed = 9;
    c.reference_multiplier = 100;
    auto r = coverage_experiment(c);
    CHECK(r.reference_n == 20000);
    CHECK(r.lower.coverage >= 0.0);
    CHECK(r.lower.coverage <= 1.0);
    CHECK(r.lower.reference <= r.upper.reference + 2 * r.epsilon * std::log(2.0));
    CHECK(r.lower.std_error == doctest::Approx(std::sqrt(r.lower.coverage * (1 - r.lower.coverage) / 100)));
  }
}
