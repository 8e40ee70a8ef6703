#include "frechet/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace frechet {

LabelSpace::LabelSpace(int num_classes, std::vector<std::string> class_names)
    : num_classes_(num_classes), class_names_(std::move(class_names)) {
  if (num_classes_ < 2) {
    throw ArgumentError("label space needs at least two classes");
  }
  if (!class_names_.empty()) {
    if (static_cast<int>(class_names_.size()) != num_classes_) {
      throw ArgumentError("class_names length must equal num_classes");
    }
    std::set<std::string> unique(class_names_.begin(), class_names_.end());
    if (unique.size() != class_names_.size()) {
      throw ArgumentError("class names must be unique");
    }
  }
}

std::size_t SignatureTable::intern(const WeakSignature& s) {
  if (signatures_.empty()) {
    width_ = s.size();
  } else if (s.size() != width_) {
    throw FormatError("weak-label tuple of length " + std::to_string(s.size()) +
                      ", expected " + std::to_string(width_));
  }
  auto [it, inserted] = index_.try_emplace(s, signatures_.size());
  if (inserted) signatures_.push_back(s);
  return it->second;
}

std::optional<std::size_t> SignatureTable::find(const WeakSignature& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EncodedSignatures encode_signatures(const std::vector<WeakSignature>& raw) {
  if (raw.empty()) throw ArgumentError("no weak-label tuples to encode");
  auto table = std::make_shared<SignatureTable>();
  std::vector<std::size_t> ids;
  ids.reserve(raw.size());
  for (const auto& s : raw) ids.push_back(table->intern(s));
  return {std::move(table), std::move(ids)};
}

void DatasetView::validate(int num_classes) const {
  if (!signatures) throw FormatError("dataset has no signature table");
  const std::size_t rows = n();
  for (auto z : z_ids) {
    if (z >= signatures->size()) throw FormatError("z-id out of range");
  }
  if (scores && scores->size() != rows) throw FormatError("scores length mismatch");
  auto check_classes = [&](const std::optional<std::vector<int>>& v, const char* name) {
    if (!v) return;
    if (v->size() != rows) throw FormatError(std::string(name) + " length mismatch");
    for (int c : *v) {
      if (c < 0 || c >= num_classes) {
        throw FormatError(std::string(name) + " contains class id " + std::to_string(c));
      }
    }
  };
  check_classes(predictions, "predictions");
  check_classes(labels, "labels");
}

DatasetView DatasetView::select(const std::vector<std::size_t>& rows) const {
  DatasetView out;
  out.signatures = signatures;
  out.z_ids.reserve(rows.size());
  for (auto r : rows) out.z_ids.push_back(z_ids.at(r));
  auto pick = [&](const auto& src, auto& dst) {
    if (!src) return;
    dst.emplace();
    dst->reserve(rows.size());
    for (auto r : rows) dst->push_back(src->at(r));
  };
  pick(scores, out.scores);
  pick(predictions, out.predictions);
  pick(labels, out.labels);
  return out;
}

LabelModel::LabelModel(int num_classes, LabelModelSource source, FallbackPolicy fallback)
    : num_classes_(num_classes), source_(source), fallback_(fallback) {
  if (num_classes_ < 2) throw ArgumentError("label model needs at least two classes");
}

void LabelModel::set_row(const WeakSignature& z, const std::vector<double>& p) {
  if (static_cast<int>(p.size()) != num_classes_) {
    throw FormatError("label-model row has " + std::to_string(p.size()) + " entries, expected " +
                      std::to_string(num_classes_));
  }
  double total = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < -kSimplexTolerance || v > 1.0 + kSimplexTolerance) {
      throw FormatError("label-model entry outside [0, 1]");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kSimplexTolerance) {
    throw FormatError("label-model row sums to " + std::to_string(total));
  }
  std::vector<double> row(p.size());
  for (std::size_t y = 0; y < p.size(); ++y) row[y] = std::clamp(p[y], 0.0, 1.0) / total;
  rows_[z] = std::move(row);
}

void LabelModel::set_row_unchecked(const WeakSignature& z, const std::vector<double>& p) {
  if (static_cast<int>(p.size()) != num_classes_) {
    throw FormatError("label-model row length mismatch");
  }
  rows_[z] = p;
}

const std::vector<double>* LabelModel::find(const WeakSignature& z) const {
  auto it = rows_.find(z);
  return it == rows_.end() ? nullptr : &it->second;
}

Eigen::MatrixXd LabelModel::aligned(const SignatureTable& table) const {
  Eigen::MatrixXd out(num_classes_, static_cast<Eigen::Index>(table.size()));
  for (std::size_t z = 0; z < table.size(); ++z) {
    const auto* row = find(table.decode(z));
    for (int y = 0; y < num_classes_; ++y) {
      if (row) {
        out(y, static_cast<Eigen::Index>(z)) = (*row)[y];
      } else if (fallback_ == FallbackPolicy::uniform) {
        out(y, static_cast<Eigen::Index>(z)) = 1.0 / num_classes_;
      } else {
        throw CoverageError("label model has no row for signature z=" + std::to_string(z));
      }
    }
  }
  return out;
}

ValidationReport validate_label_model(const LabelModel& model, const SignatureTable& table) {
  ValidationReport report;
  for (const auto& s : table.signatures()) {
    if (!model.find(s)) report.missing_signatures.push_back(s);
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& [sig, row] : model.rows()) {
    double total = 0.0;
    bool bad = false;
    for (double v : row) {
      total += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) bad = true;
    }
    if (bad || std::abs(total - 1.0) > kSimplexTolerance) report.simplex_violations.push_back(sig);
  }
  if (!model.rows().empty()) {
    report.min_entry = lo;
    report.max_entry = hi;
  }
  return report;
}

GMatrix::GMatrix(Eigen::MatrixXd values, double sup_norm)
    : values_(std::move(values)), sup_norm_(sup_norm) {
  if (!values_.allFinite()) throw ArgumentError("G contains non-finite entries");
  if (!(sup_norm_ >= 0.0)) throw ArgumentError("G sup_norm must be non-negative");
  if (values_.size() > 0 && values_.cwiseAbs().maxCoeff() > sup_norm_) {
    throw ArgumentError("G entry exceeds declared sup_norm");
  }
}

GMatrix::GMatrix(Eigen::MatrixXd values)
    : GMatrix(values, values.size() > 0 ? values.cwiseAbs().maxCoeff() : 0.0) {}

DualVariables center_columns(const DualVariables& a) {
  DualVariables out = a;
  for (Eigen::Index z = 0; z < out.cols(); ++z) {
    out.col(z).array() -= out.col(z).mean();
  }
  return out;
}

double penalty_residual(const DualVariables& a) {
  return a.colwise().sum().squaredNorm();
}

}  // namespace frechet
