#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "frechet/bounds.hpp"
#include "frechet/metrics.hpp"

namespace frechet {

// CSV with header; columns `score`, `pred`, `label` (all optional) and
// `wl_0..wl_{K-1}` (required, -1 = abstain).
struct LoadedDataset {
  DatasetView view;
  std::size_t num_labelers = 0;
};

LoadedDataset read_dataset_csv(std::istream& in);
LoadedDataset load_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(std::ostream& out, const DatasetView& data);

// {"num_classes": int, "entries": [{"z": [...], "p": [...]}], "fallback": "error"|"uniform"}
LabelModel label_model_from_json(const nlohmann::json& j);
nlohmann::ordered_json label_model_to_json(const LabelModel& model);
LabelModel load_label_model_json(const std::filesystem::path& path);
void save_label_model_json(const std::filesystem::path& path, const LabelModel& model);

// P̂(y | z) = (count(y, z) + α) / (count(z) + α |Y|) over the dataset's signatures.
LabelModel count_label_model(const DatasetView& data, int num_classes, double smoothing_alpha);

// Rounds to 9 significant digits; the JSON writer then prints the shortest form.
double round_sig9(double x);

struct MetricResult {
  double lower = 0.0;
  double upper = 0.0;
  double lower_std = 0.0;
  double upper_std = 0.0;
  ConfidenceInterval ci_lower;
  ConfidenceInterval ci_upper;
  double epsilon = 0.0;
  std::size_t n = 0;
  bool clamped = false;
  std::optional<double> label_model_score;
  SolveReport solver_lower;
  SolveReport solver_upper;
};

struct ResultFile {
  std::map<std::string, MetricResult> metrics;
  std::map<std::string, double> quantities;  // e.g. p_hat_h1, p_hat_y1
  std::vector<std::string> notes;
};

nlohmann::ordered_json to_json(const SolveReport& r);
SolveReport solve_report_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ResultFile& r);
ResultFile result_file_from_json(const nlohmann::json& j);

// Metric entry assembled from a pair of bound estimates.
MetricResult make_metric_result(const BoundPair& b, double gamma);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

// Plot-ready CSV: threshold,metric,lower,upper,lower_std,upper_std,ci_level,
// ci_lower_lo,ci_lower_hi,ci_upper_lo,ci_upper_hi,clamped,n
void write_sweep_csv(std::ostream& out, const SweepTable& table);

}  // namespace frechet
