#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace frechet {

// Error hierarchy. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

// A data signature has no row in the label model.
class CoverageError : public Error {
 public:
  using Error::Error;
};

class InconsistentError : public Error {
 public:
  using Error::Error;
};

class TooLargeError : public Error {
 public:
  using Error::Error;
};

class InsufficientSampleError : public Error {
 public:
  using Error::Error;
};

class DegenerateDenominatorError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, Eigen::VectorXd last_good)
      : Error(what), last_good_(std::move(last_good)) {}

  const Eigen::VectorXd& last_good_iterate() const { return last_good_; }

 private:
  Eigen::VectorXd last_good_;
};

inline constexpr double kSimplexTolerance = 1e-9;
inline constexpr int kAbstain = -1;

class LabelSpace {
 public:
  explicit LabelSpace(int num_classes, std::vector<std::string> class_names = {});

  int num_classes() const { return num_classes_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

 private:
  int num_classes_;
  std::vector<std::string> class_names_;
};

// One labeler output per position; kAbstain marks an abstention.
using WeakSignature = std::vector<int>;

class SignatureTable {
 public:
  SignatureTable() = default;

  // Returns the id of `s`, inserting it if unseen.
  std::size_t intern(const WeakSignature& s);

  std::optional<std::size_t> find(const WeakSignature& s) const;
  const WeakSignature& decode(std::size_t z) const { return signatures_.at(z); }
  std::size_t size() const { return signatures_.size(); }
  std::size_t width() const { return width_; }
  const std::vector<WeakSignature>& signatures() const { return signatures_; }

 private:
  std::vector<WeakSignature> signatures_;
  std::map<WeakSignature, std::size_t> index_;
  std::size_t width_ = 0;
};

struct EncodedSignatures {
  std::shared_ptr<const SignatureTable> table;
  std::vector<std::size_t> ids;
};

// Ids follow first-observed order. Throws FormatError on ragged input.
EncodedSignatures encode_signatures(const std::vector<WeakSignature>& raw);

struct DatasetView {
  std::shared_ptr<const SignatureTable> signatures;
  std::vector<std::size_t> z_ids;
  std::optional<std::vector<double>> scores;
  std::optional<std::vector<int>> predictions;
  std::optional<std::vector<int>> labels;

  std::size_t n() const { return z_ids.size(); }
  std::size_t num_signatures() const { return signatures ? signatures->size() : 0; }

  // Throws ArgumentError when list lengths or ids are inconsistent.
  void validate(int num_classes) const;

  // Rows listed in `rows`, in that order.
  DatasetView select(const std::vector<std::size_t>& rows) const;
};

enum class LabelModelSource { external, counted_from_labels };
enum class FallbackPolicy { error, uniform };

// P(Y | Z) keyed by weak-label signature.
class LabelModel {
 public:
  LabelModel(int num_classes, LabelModelSource source = LabelModelSource::external,
             FallbackPolicy fallback = FallbackPolicy::error);

  // Rows off the simplex by more than kSimplexTolerance are rejected; rows within
  // tolerance are renormalized.
  void set_row(const WeakSignature& z, const std::vector<double>& p);
  // Stores the row verbatim; used for validation tests and diagnostics.
  void set_row_unchecked(const WeakSignature& z, const std::vector<double>& p);

  int num_classes() const { return num_classes_; }
  LabelModelSource source() const { return source_; }
  FallbackPolicy fallback() const { return fallback_; }
  void set_fallback(FallbackPolicy f) { fallback_ = f; }

  const std::map<WeakSignature, std::vector<double>>& rows() const { return rows_; }
  const std::vector<double>* find(const WeakSignature& z) const;

  // |Y| x |Z| matrix with column z = P(. | signature z). Missing signatures throw
  // CoverageError unless the fallback policy is uniform.
  Eigen::MatrixXd aligned(const SignatureTable& table) const;

 private:
  int num_classes_;
  LabelModelSource source_;
  FallbackPolicy fallback_;
  std::map<WeakSignature, std::vector<double>> rows_;
};

struct ValidationReport {
  std::vector<WeakSignature> missing_signatures;
  std::vector<WeakSignature> simplex_violations;
  double min_entry = 0.0;
  double max_entry = 0.0;

  bool ok() const { return missing_signatures.empty() && simplex_violations.empty(); }
};

ValidationReport validate_label_model(const LabelModel& model, const SignatureTable& table);

// n x |Y| matrix of g(X_i, y, Z_i).
class GMatrix {
 public:
  GMatrix(Eigen::MatrixXd values, double sup_norm);
  // sup_norm taken as max |value|.
  explicit GMatrix(Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const { return values_; }
  double sup_norm() const { return sup_norm_; }
  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }

 private:
  Eigen::MatrixXd values_;
  double sup_norm_;
};

// |Y| x |Z| dual matrix; Eigen's column-major storage makes the flat layout
// z-major: entry (y, z) lives at z * |Y| + y.
using DualVariables = Eigen::MatrixXd;

// Subtracts each column's mean.
DualVariables center_columns(const DualVariables& a);

// Σ_z (Σ_y a[y, z])².
double penalty_residual(const DualVariables& a);

}  // namespace frechet
