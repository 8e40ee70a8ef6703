#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "frechet/bounds.hpp"
#include "frechet/cli.hpp"
#include "frechet/diagnostics.hpp"
#include "frechet/io.hpp"
#include "frechet/metrics.hpp"
#include "frechet/oracle.hpp"
#include "frechet/synth.hpp"

namespace py = pybind11;
using namespace frechet;

namespace {

ObjectiveSide parse_side(const std::string& s) {
  if (s == "lower") return ObjectiveSide::lower;
  if (s == "upper") return ObjectiveSide::upper;
  throw ArgumentError("side must be 'lower' or 'upper'");
}

SmoothingConfig smoothing(int num_classes, std::optional<double> epsilon, double penalty) {
  SmoothingConfig cfg = SmoothingConfig::defaults_for(num_classes);
  if (epsilon) cfg.epsilon = *epsilon;
  cfg.penalty_weight = penalty;
  cfg.validate();
  return cfg;
}

SolverConfig solver(int max_iterations, double tolerance) {
  SolverConfig s;
  s.max_iterations = max_iterations;
  s.gradient_tolerance = tolerance;
  s.validate();
  return s;
}

DatasetView make_dataset(const std::vector<WeakSignature>& signatures,
                         std::optional<std::vector<double>> scores,
                         std::optional<std::vector<int>> predictions,
                         std::optional<std::vector<int>> labels) {
  auto enc = encode_signatures(signatures);
  DatasetView d;
  d.signatures = enc.table;
  d.z_ids = std::move(enc.ids);
  d.scores = std::move(scores);
  d.predictions = std::move(predictions);
  d.labels = std::move(labels);
  return d;
}

MetricSpec metric_spec(const std::string& metric, std::optional<double> threshold,
                       std::optional<Eigen::MatrixXd> loss_table) {
  MetricSpec spec;
  spec.kind = parse_metric_kind(metric);
  if (spec.kind == MetricKind::custom) throw ArgumentError("pass a G matrix directly for custom metrics");
  spec.threshold = threshold;
  spec.loss_table = std::move(loss_table);
  return spec;
}

}  // namespace

PYBIND11_MODULE(frechet_bounds, m) {
  m.doc() = "Frechet bounds on classifier metrics from weak labels and a label model";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<CoverageError>(m, "CoverageError", base.ptr());
  py::register_exception<InconsistentError>(m, "InconsistentError", base.ptr());
  py::register_exception<TooLargeError>(m, "TooLargeError", base.ptr());
  py::register_exception<InsufficientSampleError>(m, "InsufficientSampleError", base.ptr());
  py::register_exception<DegenerateDenominatorError>(m, "DegenerateDenominatorError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<DatasetView>(m, "Dataset")
      .def(py::init(&make_dataset), py::arg("signatures"), py::arg("scores") = py::none(),
           py::arg("predictions") = py::none(), py::arg("labels") = py::none())
      .def_static("load_csv", [](const std::filesystem::path& p) { return load_dataset_csv(p).view; })
      .def("save_csv",
           [](const DatasetView& d, const std::filesystem::path& p) {
             std::ostringstream out;
             write_dataset_csv(out, d);
             write_text_file(p, out.str());
           })
      .def_property_readonly("n", &DatasetView::n)
      .def_property_readonly("num_signatures", &DatasetView::num_signatures)
      .def_property_readonly("signatures", [](const DatasetView& d) { return d.signatures->signatures(); })
      .def_readonly("z_ids", &DatasetView::z_ids)
      .def_readonly("scores", &DatasetView::scores)
      .def_readonly("predictions", &DatasetView::predictions)
      .def_readonly("labels", &DatasetView::labels)
      .def("subsample", &subsample_for_bounds, py::arg("n_target"), py::arg("seed"));

  py::class_<LabelModel>(m, "LabelModel")
      .def(py::init([](int k, const std::string& fallback) {
             if (fallback != "error" && fallback != "uniform") throw ArgumentError("fallback must be error or uniform");
             return LabelModel(k, LabelModelSource::external,
                               fallback == "uniform" ? FallbackPolicy::uniform : FallbackPolicy::error);
           }),
           py::arg("num_classes"), py::arg("fallback") = "error")
      .def("set_row", &LabelModel::set_row, py::arg("signature"), py::arg("probs"))
      .def("row", [](const LabelModel& lm, const WeakSignature& z) -> std::optional<std::vector<double>> {
        const auto* r = lm.find(z);
        if (!r) return std::nullopt;
        return *r;
      })
      .def_property_readonly("num_classes", &LabelModel::num_classes)
      .def_property_readonly("rows", &LabelModel::rows)
      .def_static("load_json", &load_label_model_json)
      .def("save_json", [](const LabelModel& lm, const std::filesystem::path& p) { save_label_model_json(p, lm); })
      .def_static("count", &count_label_model, py::arg("dataset"), py::arg("num_classes"), py::arg("alpha") = 0.0)
      .def("validate", [](const LabelModel& lm, const DatasetView& d) {
        const auto r = validate_label_model(lm, *d.signatures);
        py::dict out;
        out["missing_signatures"] = r.missing_signatures;
        out["simplex_violations"] = r.simplex_violations;
        out["min_entry"] = r.min_entry;
        out["max_entry"] = r.max_entry;
        out["ok"] = r.ok();
        return out;
      });

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("final_gradient_norm", &SolveReport::final_gradient_norm)
      .def_readonly("converged", &SolveReport::converged)
      .def_readonly("penalty_residual", &SolveReport::penalty_residual)
      .def_readonly("optimizer_sup_norm", &SolveReport::optimizer_sup_norm);

  py::class_<ConfidenceInterval>(m, "ConfidenceInterval")
      .def_readonly("level", &ConfidenceInterval::level)
      .def_readonly("low", &ConfidenceInterval::low)
      .def_readonly("high", &ConfidenceInterval::high);

  py::class_<BoundEstimate>(m, "BoundEstimate")
      .def_property_readonly("side", [](const BoundEstimate& b) { return std::string(to_string(b.side)); })
      .def_readonly("value", &BoundEstimate::value)
      .def_readonly("optimizer", &BoundEstimate::optimizer)
      .def_readonly("plugin_std", &BoundEstimate::plugin_std)
      .def_readonly("n", &BoundEstimate::n)
      .def_readonly("report", &BoundEstimate::report)
      .def_readonly("epsilon", &BoundEstimate::epsilon)
      .def("confidence_interval", py::overload_cast<const BoundEstimate&, double>(&confidence_interval),
           py::arg("gamma") = 0.05);

  py::class_<BoundPair>(m, "BoundPair")
      .def_readonly("lower", &BoundPair::lower)
      .def_readonly("upper", &BoundPair::upper);

  py::class_<SignatureContribution>(m, "SignatureContribution")
      .def_readonly("z", &SignatureContribution::z)
      .def_readonly("lower", &SignatureContribution::lower)
      .def_readonly("upper", &SignatureContribution::upper);

  py::class_<OracleResult>(m, "OracleResult")
      .def_readonly("lower", &OracleResult::lower)
      .def_readonly("upper", &OracleResult::upper)
      .def_readonly("per_signature", &OracleResult::per_signature);

  py::class_<RatioBound>(m, "RatioBound")
      .def_readonly("lower", &RatioBound::lower)
      .def_readonly("upper", &RatioBound::upper)
      .def_readonly("lower_std", &RatioBound::lower_std)
      .def_readonly("upper_std", &RatioBound::upper_std)
      .def_property_readonly("clamped", &RatioBound::clamped);

  py::class_<PRFBounds>(m, "PRFBounds")
      .def_readonly("precision", &PRFBounds::precision)
      .def_readonly("recall", &PRFBounds::recall)
      .def_readonly("f1", &PRFBounds::f1)
      .def_readonly("p_hat_h1", &PRFBounds::p_hat_h1)
      .def_readonly("p_hat_y1", &PRFBounds::p_hat_y1);

  py::class_<MisspecReport>(m, "MisspecReport")
      .def_readonly("delta", &MisspecReport::delta)
      .def_readonly("bound_gap_lower", &MisspecReport::bound_gap_lower)
      .def_readonly("bound_gap_upper", &MisspecReport::bound_gap_upper)
      .def_readonly("certificate_lower", &MisspecReport::certificate_lower)
      .def_readonly("certificate_upper", &MisspecReport::certificate_upper)
      .def_readonly("certificate", &MisspecReport::certificate)
      .def_readonly("within_certificate", &MisspecReport::within_certificate)
      .def_readonly("notes", &MisspecReport::notes);

  py::class_<SelectionResult>(m, "SelectionResult")
      .def_property_readonly("strategy", [](const SelectionResult& r) { return std::string(to_string(r.strategy)); })
      .def_readonly("chosen_index", &SelectionResult::chosen_index)
      .def_readonly("scores", &SelectionResult::scores);

  py::class_<TrueMetrics>(m, "TrueMetrics")
      .def_readonly("accuracy", &TrueMetrics::accuracy)
      .def_readonly("joint_positive", &TrueMetrics::joint_positive)
      .def_readonly("precision", &TrueMetrics::precision)
      .def_readonly("recall", &TrueMetrics::recall)
      .def_readonly("f1", &TrueMetrics::f1)
      .def_readonly("p_h1", &TrueMetrics::p_h1)
      .def_readonly("p_y1", &TrueMetrics::p_y1);

  py::class_<SynthOutput>(m, "SynthOutput")
      .def_readonly("data", &SynthOutput::data)
      .def_readonly("exact_model", &SynthOutput::exact_model)
      .def_readonly("truth", &SynthOutput::truth);

  m.def("soft_extreme",
        [](const std::vector<double>& v, double eps, const std::string& side) {
          return soft_extreme(v, eps, parse_side(side));
        },
        py::arg("values"), py::arg("epsilon"), py::arg("side"));

  m.def("build_g",
        [](const DatasetView& d, const std::string& metric, int num_classes, std::optional<double> threshold,
           std::optional<Eigen::MatrixXd> loss_table) {
          return build_g(d, metric_spec(metric, threshold, std::move(loss_table)), LabelSpace(num_classes)).values();
        },
        py::arg("dataset"), py::arg("metric") = "accuracy", py::arg("num_classes") = 2,
        py::arg("threshold") = py::none(), py::arg("loss_table") = py::none());

  m.def("eval_objective",
        [](const DatasetView& d, const LabelModel& lm, const Eigen::MatrixXd& g, const Eigen::MatrixXd& a,
           double eps, const std::string& side) {
          return eval_objective(d, lm, GMatrix(g), a, {eps, 1.0}, parse_side(side));
        },
        py::arg("dataset"), py::arg("model"), py::arg("g"), py::arg("a"), py::arg("epsilon"), py::arg("side"));

  m.def("gradient",
        [](const DatasetView& d, const LabelModel& lm, const Eigen::MatrixXd& g, const Eigen::MatrixXd& a,
           double eps, double penalty, const std::string& side) {
          return gradient(d, lm, GMatrix(g), a, {eps, penalty}, parse_side(side));
        },
        py::arg("dataset"), py::arg("model"), py::arg("g"), py::arg("a"), py::arg("epsilon"),
        py::arg("penalty") = 1.0, py::arg("side") = "upper");

  m.def("estimate_bounds",
        [](const DatasetView& d, const LabelModel& lm, const Eigen::MatrixXd& g, std::optional<double> eps,
           double penalty, int max_iterations, double tolerance) {
          return estimate_bounds(d, lm, GMatrix(g), smoothing(lm.num_classes(), eps, penalty),
                                 solver(max_iterations, tolerance));
        },
        py::arg("dataset"), py::arg("model"), py::arg("g"), py::arg("epsilon") = py::none(),
        py::arg("penalty") = 1.0, py::arg("max_iterations") = SolverConfig{}.max_iterations,
        py::arg("tolerance") = SolverConfig{}.gradient_tolerance);

  m.def("exact_bounds",
        [](const DatasetView& d, const LabelModel& lm, const Eigen::MatrixXd& g) {
          return exact_bounds(d, lm, GMatrix(g));
        },
        py::arg("dataset"), py::arg("model"), py::arg("g"));

  m.def("normal_quantile", &normal_quantile, py::arg("p"));
  m.def("confidence_interval",
        py::overload_cast<double, double, std::size_t, double>(&confidence_interval), py::arg("value"),
        py::arg("std"), py::arg("n"), py::arg("gamma") = 0.05);
  m.def("estimate_class_prior", &estimate_class_prior, py::arg("dataset"), py::arg("model"),
        py::arg("positive_class") = 1);
  m.def("estimate_h1", &estimate_h1, py::arg("dataset"), py::arg("threshold") = py::none());
  m.def("prf_from_joint",
        py::overload_cast<double, double, double, double, double, double>(&prf_from_joint), py::arg("lower"),
        py::arg("lower_std"), py::arg("upper"), py::arg("upper_std"), py::arg("p_h1"), py::arg("p_y1"));

  m.def("tv_distance",
        [](const std::vector<double>& p, const std::vector<double>& q) { return tv_distance(p, q); });
  m.def("conditional_entropy_y",
        py::overload_cast<const LabelModel&, const DatasetView&>(&conditional_entropy_y), py::arg("model"),
        py::arg("dataset"));
  m.def("informativeness_bound", &informativeness_bound, py::arg("g_sup"), py::arg("h_cond"));
  m.def("label_model_score",
        [](const DatasetView& d, const LabelModel& lm, const Eigen::MatrixXd& g) {
          return label_model_score(d, lm, GMatrix(g));
        },
        py::arg("dataset"), py::arg("model"), py::arg("g"));
  m.def("misspecification_report",
        [](const DatasetView& d, const LabelModel& p, const LabelModel& q, const Eigen::MatrixXd& g,
           std::optional<double> eps) {
          return misspecification_report(d, p, q, GMatrix(g), smoothing(p.num_classes(), eps, 1.0), SolverConfig{});
        },
        py::arg("dataset"), py::arg("model_p"), py::arg("model_q"), py::arg("g"), py::arg("epsilon") = py::none());
  m.def("select_model",
        [](const std::vector<std::tuple<double, double, double>>& candidates, const std::string& strategy) {
          std::vector<SelectionCandidate> c;
          for (const auto& [lo, hi, s] : candidates) c.push_back({lo, hi, s});
          return select_model(c, parse_selection_strategy(strategy));
        },
        py::arg("candidates"), py::arg("strategy"));

  m.def("generate_synthetic",
        [](std::size_t n, std::vector<double> accuracies, std::vector<double> abstain, double prior,
           double separation, double threshold, std::uint64_t seed) {
          SynthSpec s;
          s.n = n;
          s.labeler_accuracies = std::move(accuracies);
          s.abstain_rates = std::move(abstain);
          s.prior_y1 = prior;
          s.score_separation = separation;
          s.threshold = threshold;
          s.seed = seed;
          return generate_synthetic(s);
        },
        py::arg("n") = 1000, py::arg("accuracies") = std::vector<double>{0.8, 0.7, 0.65},
        py::arg("abstain_rates") = std::vector<double>{}, py::arg("prior_y1") = 0.5,
        py::arg("score_separation") = 2.0, py::arg("threshold") = 0.5, py::arg("seed") = 0);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          const int code = run_cli(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command line in-process; returns (exit_code, stdout, stderr).");
}
