#include "frechet/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace frechet {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse_number(const std::string& text, std::size_t line_no, const std::string& column) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw FormatError("line " + std::to_string(line_no) + ", column '" + column +
                      "': cannot parse '" + text + "'");
  }
  return value;
}

// %.17g: doubles survive the CSV round trip exactly.
std::string format_exact(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::ordered_json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round_sig9(x);
}

double read_number(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

}  // namespace

LoadedDataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv_line(trim(line));
      break;
    }
  }
  if (header.empty()) throw FormatError("dataset file is empty");

  int score_col = -1;
  int pred_col = -1;
  int label_col = -1;
  std::map<std::size_t, int> wl_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    const int col = static_cast<int>(c);
    if (name == "score") {
      score_col = col;
    } else if (name == "pred") {
      pred_col = col;
    } else if (name == "label") {
      label_col = col;
    } else if (name.rfind("wl_", 0) == 0) {
      const auto k = parse_number<std::size_t>(name.substr(3), line_no, name);
      if (!wl_cols.emplace(k, col).second) throw FormatError("duplicate column " + name);
    } else {
      throw FormatError("unknown column '" + name + "'");
    }
  }
  if (wl_cols.empty()) throw FormatError("dataset has no wl_* columns");
  if (wl_cols.rbegin()->first + 1 != wl_cols.size()) {
    throw FormatError("wl_* columns must be numbered 0..K-1");
  }

  std::vector<WeakSignature> raw;
  std::vector<double> scores;
  std::vector<int> preds;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto fields = split_csv_line(t);
    if (fields.size() != header.size()) {
      throw FormatError("line " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header.size()));
    }
    if (score_col >= 0) {
      const double s = parse_number<double>(fields[score_col], line_no, "score");
      if (!(s >= 0.0 && s <= 1.0)) throw FormatError("score outside [0, 1] on line " + std::to_string(line_no));
      scores.push_back(s);
    }
    if (pred_col >= 0) preds.push_back(parse_number<int>(fields[pred_col], line_no, "pred"));
    if (label_col >= 0) labels.push_back(parse_number<int>(fields[label_col], line_no, "label"));
    WeakSignature sig;
    for (const auto& [k, col] : wl_cols) {
      const int v = parse_number<int>(fields[col], line_no, "wl_" + std::to_string(k));
      if (v < kAbstain) throw FormatError("weak label below -1 on line " + std::to_string(line_no));
      sig.push_back(v);
    }
    raw.push_back(std::move(sig));
  }
  if (raw.empty()) throw FormatError("dataset has no rows");

  auto encoded = encode_signatures(raw);
  LoadedDataset out;
  out.num_labelers = wl_cols.size();
  out.view.signatures = std::move(encoded.table);
  out.view.z_ids = std::move(encoded.ids);
  if (score_col >= 0) out.view.scores = std::move(scores);
  if (pred_col >= 0) out.view.predictions = std::move(preds);
  if (label_col >= 0) out.view.labels = std::move(labels);
  return out;
}

LoadedDataset load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open dataset " + path.string());
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const DatasetView& data) {
  const std::size_t k = data.signatures->width();
  std::vector<std::string> cols;
  if (data.scores) cols.emplace_back("score");
  if (data.predictions) cols.emplace_back("pred");
  if (data.labels) cols.emplace_back("label");
  for (std::size_t j = 0; j < k; ++j) cols.push_back("wl_" + std::to_string(j));
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    bool first = true;
    auto sep = [&]() -> std::ostream& {
      if (!first) out << ',';
      first = false;
      return out;
    };
    if (data.scores) sep() << format_exact((*data.scores)[i]);
    if (data.predictions) sep() << (*data.predictions)[i];
    if (data.labels) sep() << (*data.labels)[i];
    for (int v : data.signatures->decode(data.z_ids[i])) sep() << v;
    out << '\n';
  }
}

LabelModel label_model_from_json(const nlohmann::json& j) {
  try {
    const int k = j.at("num_classes").get<int>();
    FallbackPolicy fallback = FallbackPolicy::error;
    if (j.contains("fallback")) {
      const auto f = j.at("fallback").get<std::string>();
      if (f == "uniform") {
        fallback = FallbackPolicy::uniform;
      } else if (f != "error") {
        throw FormatError("fallback must be \"error\" or \"uniform\"");
      }
    }
    LabelModelSource source = LabelModelSource::external;
    if (j.contains("source") && j.at("source").get<std::string>() == "counted-from-labels") {
      source = LabelModelSource::counted_from_labels;
    }
    LabelModel model(k, source, fallback);
    std::size_t width = 0;
    for (const auto& entry : j.at("entries")) {
      const auto z = entry.at("z").get<WeakSignature>();
      if (model.rows().empty()) {
        width = z.size();
      } else if (z.size() != width) {
        throw FormatError("label-model signatures have differing lengths");
      }
      if (model.find(z)) throw FormatError("duplicate signature in label model");
      model.set_row(z, entry.at("p").get<std::vector<double>>());
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("label model JSON: ") + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("label model JSON: ") + e.what());
  }
}

nlohmann::ordered_json label_model_to_json(const LabelModel& model) {
  nlohmann::ordered_json j;
  j["num_classes"] = model.num_classes();
  j["fallback"] = model.fallback() == FallbackPolicy::uniform ? "uniform" : "error";
  j["source"] = model.source() == LabelModelSource::external ? "external" : "counted-from-labels";
  auto entries = nlohmann::ordered_json::array();
  for (const auto& [z, p] : model.rows()) {
    nlohmann::ordered_json e;
    e["z"] = z;
    e["p"] = p;
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  return j;
}

LabelModel load_label_model_json(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("label model " + path.string() + ": " + e.what());
  }
  return label_model_from_json(j);
}

void save_label_model_json(const std::filesystem::path& path, const LabelModel& model) {
  write_text_file(path, label_model_to_json(model).dump(2) + "\n");
}

LabelModel count_label_model(const DatasetView& data, int num_classes, double smoothing_alpha) {
  if (!data.labels) throw ArgumentError("counting a label model needs labels");
  if (!(smoothing_alpha >= 0.0)) throw ArgumentError("smoothing alpha must be non-negative");
  data.validate(num_classes);
  const std::size_t num_z = data.num_signatures();
  std::vector<std::vector<double>> counts(num_z, std::vector<double>(static_cast<std::size_t>(num_classes), 0.0));
  std::vector<double> totals(num_z, 0.0);
  for (std::size_t i = 0; i < data.n(); ++i) {
    counts[data.z_ids[i]][static_cast<std::size_t>((*data.labels)[i])] += 1.0;
    totals[data.z_ids[i]] += 1.0;
  }
  LabelModel model(num_classes, LabelModelSource::counted_from_labels);
  for (std::size_t z = 0; z < num_z; ++z) {
    const double denom = totals[z] + smoothing_alpha * num_classes;
    if (!(denom > 0.0)) continue;  // unobserved and unsmoothed: no information
    std::vector<double> row(static_cast<std::size_t>(num_classes));
    for (int y = 0; y < num_classes; ++y) {
      row[static_cast<std::size_t>(y)] = (counts[z][static_cast<std::size_t>(y)] + smoothing_alpha) / denom;
    }
    model.set_row(data.signatures->decode(z), row);
  }
  return model;
}

double round_sig9(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return std::strtod(buf, nullptr);
}

nlohmann::ordered_json to_json(const SolveReport& r) {
  nlohmann::ordered_json j;
  j["iterations"] = r.iterations;
  j["final_gradient_norm"] = number(r.final_gradient_norm);
  j["converged"] = r.converged;
  j["penalty_residual"] = number(r.penalty_residual);
  j["optimizer_sup_norm"] = number(r.optimizer_sup_norm);
  return j;
}

SolveReport solve_report_from_json(const nlohmann::json& j) {
  SolveReport r;
  r.iterations = j.at("iterations").get<int>();
  r.final_gradient_norm = read_number(j.at("final_gradient_norm"));
  r.converged = j.at("converged").get<bool>();
  r.penalty_residual = read_number(j.at("penalty_residual"));
  r.optimizer_sup_norm = read_number(j.at("optimizer_sup_norm"));
  return r;
}

nlohmann::ordered_json to_json(const ResultFile& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  for (const auto& [name, m] : r.metrics) {
    nlohmann::ordered_json e;
    e["lower"] = number(m.lower);
    e["upper"] = number(m.upper);
    e["lower_std"] = number(m.lower_std);
    e["upper_std"] = number(m.upper_std);
    e["ci_level"] = number(m.ci_lower.level);
    e["ci_lower"] = {number(m.ci_lower.low), number(m.ci_lower.high)};
    e["ci_upper"] = {number(m.ci_upper.low), number(m.ci_upper.high)};
    e["epsilon"] = number(m.epsilon);
    e["n"] = m.n;
    e["clamped"] = m.clamped;
    if (m.label_model_score) e["label_model_score"] = number(*m.label_model_score);
    e["solver"] = {{"lower", to_json(m.solver_lower)}, {"upper", to_json(m.solver_upper)}};
    metrics[name] = std::move(e);
  }
  j["metrics"] = std::move(metrics);
  for (const auto& [name, v] : r.quantities) j[name] = number(v);
  j["notes"] = r.notes;
  return j;
}

ResultFile result_file_from_json(const nlohmann::json& j) {
  try {
    ResultFile r;
    for (const auto& [name, e] : j.at("metrics").items()) {
      MetricResult m;
      m.lower = read_number(e.at("lower"));
      m.upper = read_number(e.at("upper"));
      m.lower_std = read_number(e.at("lower_std"));
      m.upper_std = read_number(e.at("upper_std"));
      const double level = read_number(e.at("ci_level"));
      m.ci_lower = {level, read_number(e.at("ci_lower").at(0)), read_number(e.at("ci_lower").at(1))};
      m.ci_upper = {level, read_number(e.at("ci_upper").at(0)), read_number(e.at("ci_upper").at(1))};
      m.epsilon = read_number(e.at("epsilon"));
      m.n = e.at("n").get<std::size_t>();
      m.clamped = e.at("clamped").get<bool>();
      if (e.contains("label_model_score")) m.label_model_score = read_number(e.at("label_model_score"));
      m.solver_lower = solve_report_from_json(e.at("solver").at("lower"));
      m.solver_upper = solve_report_from_json(e.at("solver").at("upper"));
      r.metrics[name] = m;
    }
    for (const auto& [name, v] : j.items()) {
      if (name == "metrics" || name == "notes") continue;
      r.quantities[name] = read_number(v);
    }
    if (j.contains("notes")) r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("result file: ") + e.what());
  }
}

MetricResult make_metric_result(const BoundPair& b, double gamma) {
  MetricResult m;
  m.lower = b.lower.value;
  m.upper = b.upper.value;
  m.lower_std = b.lower.plugin_std;
  m.upper_std = b.upper.plugin_std;
  m.ci_lower = confidence_interval(b.lower, gamma);
  m.ci_upper = confidence_interval(b.upper, gamma);
  m.epsilon = b.lower.epsilon;
  m.n = b.lower.n;
  m.solver_lower = b.lower.report;
  m.solver_upper = b.upper.report;
  return m;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << contents;
  if (!out) throw FormatError("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_sweep_csv(std::ostream& out, const SweepTable& table) {
  out << "threshold,metric,lower,upper,lower_std,upper_std,ci_level,ci_lower_lo,ci_lower_hi,"
         "ci_upper_lo,ci_upper_hi,clamped,n\n";
  char buf[32];
  auto num = [&](double x) -> const char* {
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
  };
  for (const auto& r : table) {
    out << num(r.threshold) << ',' << r.metric << ',';
    out << num(r.lower) << ',';
    out << num(r.upper) << ',';
    out << num(r.lower_std) << ',';
    out << num(r.upper_std) << ',';
    out << num(r.ci_lower.level) << ',';
    out << num(r.ci_lower.low) << ',';
    out << num(r.ci_lower.high) << ',';
    out << num(r.ci_upper.low) << ',';
    out << num(r.ci_upper.high) << ',';
    out << (r.clamped ? 1 : 0) << ',' << r.n << '\n';
  }
}

}  // namespace frechet
