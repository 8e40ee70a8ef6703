#include "frechet/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "frechet/bounds.hpp"
#include "frechet/diagnostics.hpp"
#include "frechet/io.hpp"
#include "frechet/metrics.hpp"
#include "frechet/oracle.hpp"
#include "frechet/synth.hpp"

namespace frechet {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ArgumentError(std::string("cannot parse ") + what + " entry '" + item + "'");
    }
  }
  if (out.empty()) throw ArgumentError(std::string(what) + " list is empty");
  return out;
}

// "0,1;1,0" -> 2 x 2 matrix.
Eigen::MatrixXd parse_loss_table(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row;
  while (std::getline(ss, row, ';')) rows.push_back(parse_list(row, "loss table"));
  if (rows.empty()) throw ArgumentError("empty loss table");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ArgumentError("ragged loss table");
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void emit(const std::string& path, const std::string& contents, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    write_text_file(path, contents);
  }
}

struct SolveFlags {
  double epsilon = 0.0;  // 0 = default for |Y|
  double penalty = 1.0;
  int max_iterations = SolverConfig{}.max_iterations;
  double tolerance = SolverConfig{}.gradient_tolerance;

  void attach(CLI::App* cmd) {
    cmd->add_option("--epsilon", epsilon, "smoothing temperature (default 0.01/ln|Y|)");
    cmd->add_option("--penalty", penalty, "weight of the column-sum penalty");
    cmd->add_option("--max-iterations", max_iterations, "L-BFGS iteration cap");
    cmd->add_option("--tolerance", tolerance, "gradient sup-norm stopping tolerance");
  }

  SmoothingConfig smoothing(int num_classes) const {
    SmoothingConfig cfg = SmoothingConfig::defaults_for(num_classes);
    if (epsilon > 0.0) cfg.epsilon = epsilon;
    cfg.penalty_weight = penalty;
    cfg.validate();
    return cfg;
  }

  SolverConfig solver() const {
    SolverConfig s;
    s.max_iterations = max_iterations;
    s.gradient_tolerance = tolerance;
    s.validate();
    return s;
  }
};

// Dataset + label model + metric flags shared by estimate, sweep, oracle and diagnose.
struct InputFlags {
  std::string data;
  std::string label_model;
  double label_alpha = 0.0;
  int num_classes = 0;
  std::string metric = "accuracy";
  std::string loss_table;
  std::optional<double> threshold;

  void attach(CLI::App* cmd, bool with_metric = true) {
    cmd->add_option("--data", data, "dataset CSV")->required();
    cmd->add_option("--label-model", label_model,
                    "label model JSON (default: counted from the label column)");
    cmd->add_option("--label-alpha", label_alpha, "smoothing when counting a label model");
    cmd->add_option("--num-classes", num_classes, "number of classes when counting");
    if (with_metric) {
      cmd->add_option("--metric", metric, "accuracy | risk | joint-positive");
      cmd->add_option("--loss-table", loss_table, "risk loss table, rows ';'-separated");
      cmd->add_option("--threshold", threshold, "binarize scores with h = 1[score >= t]");
    }
  }

  struct Loaded {
    LoadedDataset dataset;
    LabelModel model;
  };

  Loaded load() const {
    LoadedDataset ds = load_dataset_csv(data);
    if (!label_model.empty()) {
      LabelModel model = load_label_model_json(label_model);
      ds.view.validate(model.num_classes());
      return {std::move(ds), std::move(model)};
    }
    if (!ds.view.labels) {
      throw ArgumentError("--label-model is required when the dataset has no label column");
    }
    int k = num_classes;
    if (k == 0) k = std::max(2, *std::max_element(ds.view.labels->begin(), ds.view.labels->end()) + 1);
    LabelModel model = count_label_model(ds.view, k, label_alpha);
    return {std::move(ds), std::move(model)};
  }

  MetricSpec metric_spec() const {
    MetricSpec spec;
    spec.kind = parse_metric_kind(metric);
    if (spec.kind == MetricKind::custom) throw ArgumentError("custom metrics are library-only");
    if (!loss_table.empty()) spec.loss_table = parse_loss_table(loss_table);
    spec.threshold = threshold;
    return spec;
  }
};

ojson signature_list(const std::vector<WeakSignature>& sigs) {
  ojson out = ojson::array();
  for (const auto& s : sigs) out.push_back(s);
  return out;
}

double num9(double x) { return round_sig9(x); }

const char* kPluginNote =
    "confidence intervals plug the fitted optimizer and the estimated label model into the "
    "asymptotic normal approximation";

int cmd_estimate(const InputFlags& in, const SolveFlags& sf, double gamma, std::size_t n_sub,
                 std::uint64_t seed, std::optional<double> prior, const std::string& out_path,
                 std::ostream& out) {
  auto [ds, model] = in.load();
  const LabelSpace space(model.num_classes());
  const MetricSpec spec = in.metric_spec();
  const DatasetView& full = ds.view;
  const DatasetView view = n_sub > 0 ? subsample_for_bounds(full, n_sub, seed) : full;
  const SmoothingConfig cfg = sf.smoothing(model.num_classes());
  const GMatrix g = build_g(view, spec, space);
  const BoundPair b = estimate_bounds(view, model, g, cfg, sf.solver());

  ResultFile result;
  MetricResult base = make_metric_result(b, gamma);
  base.label_model_score = label_model_score(view, model, g);
  result.notes.emplace_back(kPluginNote);
  if (view.n() == full.n()) {
    result.notes.emplace_back(
        "bounds and marginal estimates use the same samples (n = m); the n = o(m^(2*lambda)) "
        "rate condition is not met formally");
  }
  if (!b.lower.report.converged || !b.upper.report.converged) {
    result.notes.emplace_back("solver stopped before reaching the gradient tolerance");
  }

  if (spec.kind == MetricKind::joint_positive) {
    const double p_h1 = estimate_h1(full, spec.threshold);
    const double p_y1 = prior ? *prior : estimate_class_prior(full, model, 1);
    result.quantities["p_hat_h1"] = p_h1;
    result.quantities["p_hat_y1"] = p_y1;
    result.metrics["joint_positive"] = base;
    const PRFBounds prf = prf_from_joint(b.lower, b.upper, p_h1, p_y1);
    auto add = [&](const char* name, const RatioBound& r) {
      MetricResult m = base;
      m.label_model_score.reset();
      m.lower = r.lower;
      m.upper = r.upper;
      m.lower_std = r.lower_std;
      m.upper_std = r.upper_std;
      m.ci_lower = confidence_interval(r.lower, r.lower_std, view.n(), gamma);
      m.ci_upper = confidence_interval(r.upper, r.upper_std, view.n(), gamma);
      m.clamped = r.clamped();
      result.metrics[name] = m;
    };
    add("precision", prf.precision);
    add("recall", prf.recall);
    add("f1", prf.f1);
  } else {
    result.metrics[to_string(spec.kind)] = base;
  }
  emit(out_path, to_json(result).dump(2) + "\n", out);
  return kExitOk;
}

int cmd_sweep(const InputFlags& in, const SolveFlags& sf, const std::string& thresholds,
              double gamma, std::optional<double> prior, const std::string& out_path,
              std::ostream& out) {
  auto [ds, model] = in.load();
  std::vector<MetricKind> kinds;
  std::stringstream ss(in.metric);
  std::string item;
  while (std::getline(ss, item, ',')) kinds.push_back(parse_metric_kind(item));
  SweepOptions options;
  options.gamma = gamma;
  options.prior_y1 = prior;
  const SweepTable table = threshold_sweep(ds.view, model, parse_list(thresholds, "threshold"), kinds,
                                           sf.smoothing(model.num_classes()), sf.solver(), options);
  std::ostringstream csv;
  write_sweep_csv(csv, table);
  emit(out_path, csv.str(), out);
  return kExitOk;
}

int cmd_select(const std::string& dir, const std::string& strategy_name, const std::string& metric,
               const std::string& out_path, std::ostream& out) {
  const SelectionStrategy strategy = parse_selection_strategy(strategy_name);
  if (!fs::is_directory(dir)) throw FormatError("candidates directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw FormatError("no candidate result files in " + dir);

  std::vector<SelectionCandidate> candidates;
  ojson names = ojson::array();
  for (const auto& f : files) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(f));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(f.string() + ": " + e.what());
    }
    const ResultFile r = result_file_from_json(j);
    auto it = r.metrics.find(metric);
    if (it == r.metrics.end()) throw FormatError(f.string() + " has no metric '" + metric + "'");
    SelectionCandidate c;
    c.lower = it->second.lower;
    c.upper = it->second.upper;
    if (it->second.label_model_score) {
      c.label_model_score = *it->second.label_model_score;
    } else if (strategy == SelectionStrategy::label_model) {
      throw FormatError(f.string() + " has no label_model_score for '" + metric + "'");
    }
    candidates.push_back(c);
    names.push_back(f.filename().string());
  }
  const SelectionResult sel = select_model(candidates, strategy);
  ojson j;
  j["strategy"] = to_string(sel.strategy);
  j["metric"] = metric;
  j["chosen_index"] = sel.chosen_index;
  j["chosen"] = names[sel.chosen_index];
  j["candidates"] = names;
  ojson scores = ojson::array();
  for (double s : sel.scores) scores.push_back(num9(s));
  j["scores"] = scores;
  emit(out_path, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_oracle(const InputFlags& in, const std::string& out_path, std::ostream& out) {
  auto [ds, model] = in.load();
  const GMatrix g = build_g(ds.view, in.metric_spec(), LabelSpace(model.num_classes()));
  const OracleResult r = exact_bounds(ds.view, model, g);
  char line[96];
  std::snprintf(line, sizeof line, "L=%.9g U=%.9g\n", r.lower, r.upper);
  out << line;
  if (!out_path.empty()) {
    ojson j;
    j["lower"] = num9(r.lower);
    j["upper"] = num9(r.upper);
    ojson parts = ojson::array();
    for (const auto& p : r.per_signature) {
      parts.push_back({{"z", ds.view.signatures->decode(p.z)},
                       {"lower", num9(p.lower)},
                       {"upper", num9(p.upper)}});
    }
    j["per_signature"] = parts;
    write_text_file(out_path, j.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_diagnose(const InputFlags& in, const SolveFlags& sf, const std::string& alt_path,
                 const std::string& out_path, std::ostream& out) {
  auto [ds, model] = in.load();
  const GMatrix g = build_g(ds.view, in.metric_spec(), LabelSpace(model.num_classes()));
  const ValidationReport v = validate_label_model(model, *ds.view.signatures);

  ojson j;
  j["validation"] = {{"missing_signatures", signature_list(v.missing_signatures)},
                     {"simplex_violations", signature_list(v.simplex_violations)},
                     {"min_entry", num9(v.min_entry)},
                     {"max_entry", num9(v.max_entry)}};
  const double h = conditional_entropy_y(model, ds.view);
  j["conditional_entropy_y"] = num9(h);
  j["g_sup_norm"] = num9(g.sup_norm());
  j["informativeness_bound"] = num9(informativeness_bound(g.sup_norm(), h));
  j["label_model_score"] = num9(label_model_score(ds.view, model, g));
  if (!alt_path.empty()) {
    const LabelModel alt = load_label_model_json(alt_path);
    const MisspecReport m = misspecification_report(ds.view, model, alt, g,
                                                    sf.smoothing(model.num_classes()), sf.solver());
    j["misspecification"] = {{"delta", num9(m.delta)},
                             {"bound_gap_lower", num9(m.bound_gap_lower)},
                             {"bound_gap_upper", num9(m.bound_gap_upper)},
                             {"certificate_lower", num9(m.certificate_lower)},
                             {"certificate_upper", num9(m.certificate_upper)},
                             {"certificate", num9(m.certificate)},
                             {"within_certificate", m.within_certificate},
                             {"notes", m.notes}};
  }
  emit(out_path, j.dump(2) + "\n", out);
  return kExitOk;
}

struct GeneratorFlags {
  std::string accuracies = "0.8,0.7,0.65";
  std::string abstain;
  double prior = 0.5;
  double separation = 2.0;
  double threshold = 0.5;

  void attach(CLI::App* cmd) {
    cmd->add_option("--accuracies", accuracies, "weak-labeler accuracies, comma-separated");
    cmd->add_option("--abstain", abstain, "abstain rates, comma-separated");
    cmd->add_option("--prior", prior, "P(Y = 1)");
    cmd->add_option("--separation", separation, "class separation of the score logits");
    cmd->add_option("--threshold", threshold, "score threshold for predictions");
  }

  SynthSpec spec(std::size_t n, std::uint64_t seed) const {
    SynthSpec s;
    s.n = n;
    s.labeler_accuracies = parse_list(accuracies, "accuracy");
    if (!abstain.empty()) s.abstain_rates = parse_list(abstain, "abstain rate");
    s.prior_y1 = prior;
    s.score_separation = separation;
    s.threshold = threshold;
    s.seed = seed;
    s.validate();
    return s;
  }
};

ojson truth_json(const TrueMetrics& t) {
  auto v = [](double x) -> ojson {
    if (!std::isfinite(x)) return nullptr;
    return num9(x);
  };
  return {{"accuracy", v(t.accuracy)}, {"joint_positive", v(t.joint_positive)},
          {"precision", v(t.precision)}, {"recall", v(t.recall)},
          {"f1", v(t.f1)},               {"p_h1", v(t.p_h1)},
          {"p_y1", v(t.p_y1)}};
}

int cmd_synth(const GeneratorFlags& gf, std::size_t n, std::uint64_t seed, const std::string& dir) {
  const SynthOutput s = generate_synthetic(gf.spec(n, seed));
  fs::create_directories(dir);
  std::ostringstream csv;
  write_dataset_csv(csv, s.data);
  write_text_file(fs::path(dir) / "data.csv", csv.str());
  save_label_model_json(fs::path(dir) / "label_model.json", s.exact_model);
  write_text_file(fs::path(dir) / "truth.json", truth_json(s.truth).dump(2) + "\n");
  return kExitOk;
}

int cmd_coverage(const GeneratorFlags& gf, std::size_t replications, std::size_t n, double gamma,
                 const std::string& metric, double epsilon, std::uint64_t seed,
                 const std::string& out_path, std::ostream& out) {
  CoverageSpec spec;
  spec.replications = replications;
  spec.n = n;
  spec.generator = gf.spec(n, seed);
  spec.gamma = gamma;
  spec.metric = parse_metric_kind(metric);
  if (epsilon > 0.0) spec.epsilon = epsilon;
  spec.seed = seed;
  const CoverageReport r = coverage_experiment(spec);
  auto side = [](const CoverageSide& s) {
    return ojson{{"reference", num9(s.reference)},     {"coverage", num9(s.coverage)},
                 {"std_error", num9(s.std_error)},     {"mean_estimate", num9(s.mean_estimate)},
                 {"mean_half_width", num9(s.mean_half_width)}, {"unconverged", s.unconverged}};
  };
  ojson j;
  j["replications"] = r.replications;
  j["n"] = r.n;
  j["reference_n"] = r.reference_n;
  j["gamma"] = num9(r.gamma);
  j["epsilon"] = num9(r.epsilon);
  j["lower"] = side(r.lower);
  j["upper"] = side(r.upper);
  emit(out_path, j.dump(2) + "\n", out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fréchet bounds on classifier metrics from weak labels", "frechet-bounds"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out_path;
  double gamma = 0.05;
  std::optional<double> prior;

  InputFlags est_in;
  SolveFlags est_sf;
  std::size_t est_n = 0;
  auto* estimate = app.add_subcommand("estimate", "bounds with confidence intervals for one metric");
  est_in.attach(estimate);
  est_sf.attach(estimate);
  estimate->add_option("--gamma", gamma, "1 - confidence level");
  estimate->add_option("--n", est_n, "subsample size for the bounds (default: all rows)");
  estimate->add_option("--seed", seed, "seed for subsampling");
  estimate->add_option("--prior", prior, "P(Y = 1) override for precision/recall/F1");
  estimate->add_option("--out", out_path, "result JSON path (default stdout)");

  InputFlags sweep_in;
  SolveFlags sweep_sf;
  std::string thresholds;
  auto* sweep = app.add_subcommand("sweep", "bounds across score thresholds (CSV)");
  sweep_in.attach(sweep);
  sweep_sf.attach(sweep);
  sweep->add_option("--thresholds", thresholds, "comma-separated thresholds")->required();
  sweep->add_option("--gamma", gamma, "1 - confidence level");
  sweep->add_option("--seed", seed, "unused; accepted for uniformity");
  sweep->add_option("--prior", prior, "P(Y = 1) override");
  sweep->add_option("--out", out_path, "CSV path (default stdout)");

  std::string candidates_dir;
  std::string strategy = "lower";
  std::string select_metric = "accuracy";
  auto* select = app.add_subcommand("select", "choose a model from result files");
  select->add_option("--candidates", candidates_dir, "directory of result JSON files")->required();
  select->add_option("--strategy", strategy, "lower | upper | average | label_model");
  select->add_option("--metric", select_metric, "metric entry to compare");
  select->add_option("--seed", seed, "unused; accepted for uniformity");
  select->add_option("--out", out_path, "selection JSON path (default stdout)");

  InputFlags oracle_in;
  auto* oracle = app.add_subcommand("oracle", "exact (unsmoothed) bounds by optimal transport");
  oracle_in.attach(oracle);
  oracle->add_option("--seed", seed, "unused; accepted for uniformity");
  oracle->add_option("--out", out_path, "optional JSON with per-signature contributions");

  InputFlags diag_in;
  SolveFlags diag_sf;
  std::string alt_model;
  auto* diagnose = app.add_subcommand("diagnose", "entropy bound and misspecification sensitivity");
  diag_in.attach(diagnose);
  diag_sf.attach(diagnose);
  diagnose->add_option("--label-model-alt", alt_model, "alternative label model JSON");
  diagnose->add_option("--seed", seed, "unused; accepted for uniformity");
  diagnose->add_option("--out", out_path, "diagnostics JSON path (default stdout)");

  GeneratorFlags synth_gf;
  std::size_t synth_n = 1000;
  std::string out_dir;
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset with its exact label model");
  synth_gf.attach(synth);
  synth->add_option("--n", synth_n, "number of samples");
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--out-dir", out_dir, "output directory")->required();

  GeneratorFlags cov_gf;
  std::size_t replications = 500;
  std::size_t cov_n = 2000;
  std::string cov_metric = "accuracy";
  double cov_epsilon = 0.0;
  auto* coverage = app.add_subcommand("coverage", "empirical coverage of the confidence intervals");
  cov_gf.attach(coverage);
  coverage->add_option("--replications", replications, "number of replications (>= 100)");
  coverage->add_option("--n", cov_n, "samples per replication");
  coverage->add_option("--gamma", gamma, "1 - confidence level");
  coverage->add_option("--metric", cov_metric, "accuracy | joint-positive");
  coverage->add_option("--epsilon", cov_epsilon, "smoothing temperature");
  coverage->add_option("--seed", seed, "master seed");
  coverage->add_option("--out", out_path, "report JSON path (default stdout)");

  std::vector<std::string> argv_storage{"frechet-bounds"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*estimate) return cmd_estimate(est_in, est_sf, gamma, est_n, seed, prior, out_path, out);
    if (*sweep) return cmd_sweep(sweep_in, sweep_sf, thresholds, gamma, prior, out_path, out);
    if (*select) return cmd_select(candidates_dir, strategy, select_metric, out_path, out);
    if (*oracle) return cmd_oracle(oracle_in, out_path, out);
    if (*diagnose) return cmd_diagnose(diag_in, diag_sf, alt_model, out_path, out);
    if (*synth) return cmd_synth(synth_gf, synth_n, seed, out_dir);
    if (*coverage) {
      return cmd_coverage(cov_gf, replications, cov_n, gamma, cov_metric, cov_epsilon, seed,
                          out_path, out);
    }
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace frechet
