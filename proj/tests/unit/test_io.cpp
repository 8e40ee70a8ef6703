#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "frechet/io.hpp"
#include "support/fixtures.hpp"

using namespace frechet;

TEST_SUITE("io") {
  TEST_CASE("dataset CSV round trip") {
    Rng rng(103);
    DatasetView d = testing::dataset_from_ids({0, 1, 2, 1});
    d.scores = std::vector<double>{rng.uniform(), rng.uniform(), 1.0 / 3.0, 0.0};
    d.predictions = std::vector<int>{0, 1, 1, 0};
    d.labels = std::vector<int>{1, 1, 0, 0};
    std::ostringstream out;
    write_dataset_csv(out, d);
    std::istringstream in(out.str());
    auto back = read_dataset_csv(in);
    CHECK(back.num_labelers == 1);
    CHECK(back.view.z_ids == d.z_ids);
    CHECK(*back.view.scores == *d.scores);
    CHECK(*back.view.predictions == *d.predictions);
    CHECK(*back.view.labels == *d.labels);
    std::ostringstream again;
    write_dataset_csv(again, back.view);
    CHECK(again.str() == out.str());
  }

  TEST_CASE("dataset CSV parsing") {
    std::istringstream in("wl_1, wl_0 ,pred\n-1,0,1\n\n1,0,0\n");
    auto d = read_dataset_csv(in);
    CHECK(d.view.n() == 2);
    CHECK(d.view.signatures->decode(0) == WeakSignature{0, -1});
    CHECK(d.view.signatures->decode(1) == WeakSignature{0, 1});
    CHECK_FALSE(d.view.scores.has_value());
  }

  TEST_CASE("dataset CSV errors") {
    auto fails = [](const std::string& text) {
      std::istringstream in(text);
      CHECK_THROWS_AS(read_dataset_csv(in), FormatError);
    };
    fails("");
    fails("score,pred\n0.5,1\n");
    fails("wl_0,wl_2\n0,0\n");
    fails("wl_0,color\n0,red\n");
    fails("wl_0,score\n0,1.5\n");
    fails("wl_0,score\n0,abc\n");
    fails("wl_0,pred\n0\n");
    fails("wl_0\n-2\n");
    fails("wl_0\n");
  }

  TEST_CASE("label model JSON round trip") {
    LabelModel m(3, LabelModelSource::counted_from_labels, FallbackPolicy::uniform);
    m.set_row({0, -1}, {0.1, 0.2, 0.7});
    m.set_row({1, 1}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    const auto j = label_model_to_json(m);
    LabelModel back = label_model_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.num_classes() == 3);
    CHECK(back.fallback() == FallbackPolicy::uniform);
    CHECK(back.source() == LabelModelSource::counted_from_labels);
    CHECK(back.rows() == m.rows());
    CHECK(label_model_to_json(back).dump() == j.dump());
  }

  TEST_CASE("label model JSON errors") {
    auto fails = [](const char* text) {
      CHECK_THROWS_AS(label_model_from_json(nlohmann::json::parse(text)), FormatError);
    };
    fails(R"({"entries": []})");
    fails(R"({"num_classes": 2, "entries": [{"z": [0], "p": [0.6, 0.5]}]})");
    fails(R"({"num_classes": 2, "entries": [{"z": [0], "p": [0.5, 0.5]}, {"z": [0], "p": [0.5, 0.5]}]})");
    fails(R"({"num_classes": 2, "entries": [{"z": [0], "p": [0.5, 0.5]}, {"z": [0, 1], "p": [0.5, 0.5]}]})");
    fails(R"({"num_classes": 2, "fallback": "maybe", "entries": []})");
    fails(R"({"num_classes": 1, "entries": []})");
  }

  TEST_CASE("counting estimator") {
    DatasetView d = testing::dataset_from_ids({0, 0, 0, 1});
    d.labels = std::vector<int>{1, 1, 0, 1};
    LabelModel m = count_label_model(d, 2, 0.0);
    CHECK(m.source() == LabelModelSource::counted_from_labels);
    CHECK((*m.find({0}))[1] == doctest::Approx(2.0 / 3));
    CHECK((*m.find({1}))[1] == 1.0);
    LabelModel smooth = count_label_model(d, 2, 1e9);
    CHECK((*smooth.find({0}))[1] == doctest::Approx(0.5).epsilon(1e-8));
    DatasetView single = testing::dataset_from_ids({0});
    single.labels = std::vector<int>{1};
    CHECK((*count_label_model(single, 2, 1.0).find({0}))[1] == doctest::Approx(2.0 / 3));
    CHECK_THROWS_AS(count_label_model(testing::dataset_from_ids({0}), 2, 0.0), ArgumentError);
  }

  TEST_CASE("nine significant digits") {
    CHECK(round_sig9(0.1234567891234) == 0.123456789);
    CHECK(round_sig9(0.0) == 0.0);
  }

  TEST_CASE("result file round trip") {
    ResultFile r;
    MetricResult m;
    m.lower = 0.25;
    m.upper = 0.75;
    m.lower_std = 0.1;
    m.upper_std = 0.2;
    m.ci_lower = {0.95, 0.2, 0.3};
    m.ci_upper = {0.95, 0.7, 0.8};
    m.epsilon = 0.0144269504;
    m.n = 100;
    m.label_model_score = 0.5;
    m.solver_lower.iterations = 7;
    m.solver_lower.converged = true;
    r.metrics["accuracy"] = m;
    r.quantities["p_hat_h1"] = 0.4;
    r.notes = {"a note"};
    const std::string text = to_json(r).dump(2);
    ResultFile back = result_file_from_json(nlohmann::json::parse(text));
    CHECK(to_json(back).dump(2) == text);
    CHECK(back.metrics.at("accuracy").solver_lower.iterations == 7);
    CHECK(back.quantities.at("p_hat_h1") == 0.4);
    CHECK_THROWS_AS(result_file_from_json(nlohmann::json::parse(R"({"metrics": {"x": {}}})")), FormatError);
  }

  TEST_CASE("files on disk") {
    const auto dir = std::filesystem::temp_directory_path() / "frechet_io_test";
    std::filesystem::create_directories(dir);
    LabelModel m(2);
    m.set_row({1}, {0.25, 0.75});
    save_label_model_json(dir / "m.json", m);
    CHECK(load_label_model_json(dir / "m.json").rows() == m.rows());
    CHECK_THROWS_AS(load_label_model_json(dir / "missing.json"), FormatError);
    CHECK_THROWS_AS(load_dataset_csv(dir / "missing.csv"), FormatError);
    std::filesystem::remove_all(dir);
  }
}
