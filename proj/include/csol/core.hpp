#pragma once

// Shared numeric types for the online learners: feature vectors, labels,
// linear and Gaussian models, cost matrices, hyperparameters, and the
// scoring primitives every learner builds on.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace csol {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Raised when an update produces a non-finite intermediate. `round` is the
// 1-based step index of the learner that failed.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::size_t round)
      : Error(what + " (round " + std::to_string(round) + ")"), round_(round) {}
  std::size_t round() const { return round_; }

 private:
  std::size_t round_;
};

/// Immutable real-valued vector of dimension `dim`, stored as sorted
/// (index, value) pairs. Dense construction keeps every coordinate, sparse
/// construction keeps only the given entries; both score identically.
class FeatureVector {
 public:
  FeatureVector() = default;

  static FeatureVector dense(std::span<const double> values);
  static FeatureVector dense(std::initializer_list<double> values) {
    return dense(std::span<const double>(values.begin(), values.size()));
  }
  /// Entries may arrive in any order; duplicates and out-of-range indices
  /// are rejected.
  static FeatureVector sparse(std::size_t dim,
                              std::vector<std::pair<std::uint32_t, double>> entries);

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return indices_.size(); }
  std::span<const std::uint32_t> indices() const { return indices_; }
  std::span<const double> values() const { return values_; }

  double squared_norm() const;
  std::vector<double> to_dense() const;

  bool operator==(const FeatureVector&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<std::uint32_t> indices_;
  std::vector<double> values_;
};

class BinaryLabel {
 public:
  explicit BinaryLabel(int value);
  static BinaryLabel positive() { return BinaryLabel(1); }
  static BinaryLabel negative() { return BinaryLabel(-1); }
  int value() const { return value_; }
  double sign() const { return static_cast<double>(value_); }
  bool is_positive() const { return value_ == 1; }
  bool operator==(const BinaryLabel&) const = default;

 private:
  int value_;
};

/// Class index in 1..k.
class ClassLabel {
 public:
  ClassLabel(int value, std::size_t num_classes);
  int value() const { return value_; }
  std::size_t index() const { return static_cast<std::size_t>(value_ - 1); }
  std::size_t num_classes() const { return k_; }
  bool operator==(const ClassLabel&) const = default;

 private:
  int value_;
  std::size_t k_;
};

/// Features plus a raw label: ±1 for binary streams, 1..k for multiclass.
struct LabeledExample {
  FeatureVector x;
  int label = 0;
  bool operator==(const LabeledExample&) const = default;
};

enum class CovarianceMode { kDiagonal, kFull };

std::string_view to_string(CovarianceMode mode);
CovarianceMode parse_covariance_mode(std::string_view text);

/// Covariance of a Gaussian over weights, either a full symmetric d×d
/// matrix (row-major) or its diagonal. Initialized to the identity.
class Covariance {
 public:
  Covariance() = default;
  Covariance(std::size_t dim, CovarianceMode mode);

  std::size_t dim() const { return dim_; }
  CovarianceMode mode() const { return mode_; }

  /// Σx as a dense vector of length dim.
  void multiply(const FeatureVector& x, std::vector<double>& out) const;
  /// xᵀΣx.
  double quadratic_form(const FeatureVector& x) const;
  /// Σ ← Σ − β·(Σx)(Σx)ᵀ; the diagonal mode keeps only the diagonal of the
  /// rank-one term. `sigma_x` must be Σx for the same x.
  void downdate(const FeatureVector& x, std::span<const double> sigma_x, double beta);

  /// Entry (i, j); zero off the diagonal in diagonal mode.
  double at(std::size_t i, std::size_t j) const;
  std::span<const double> raw() const { return data_; }

  bool operator==(const Covariance&) const = default;

 private:
  std::size_t dim_ = 0;
  CovarianceMode mode_ = CovarianceMode::kDiagonal;
  std::vector<double> data_;
};

struct LinearModel {
  std::vector<double> weights;

  explicit LinearModel(std::size_t dim = 0) : weights(dim, 0.0) {}
  std::size_t dim() const { return weights.size(); }
  bool operator==(const LinearModel&) const = default;
};

/// μ = 0, Σ = I at construction.
struct GaussianLinearModel {
  std::vector<double> mean;
  Covariance covariance;

  GaussianLinearModel() = default;
  GaussianLinearModel(std::size_t dim, CovarianceMode mode)
      : mean(dim, 0.0), covariance(dim, mode) {}
  std::size_t dim() const { return mean.size(); }
  bool operator==(const GaussianLinearModel&) const = default;
};

/// k×d compound weight matrix W; row i is the model of class i+1.
class MulticlassModel {
 public:
  MulticlassModel() = default;
  MulticlassModel(std::size_t num_classes, std::size_t dim);

  std::size_t num_classes() const { return k_; }
  std::size_t dim() const { return d_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * d_, d_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * d_, d_}; }
  std::span<const double> raw() const { return data_; }

  bool operator==(const MulticlassModel&) const = default;

 private:
  std::size_t k_ = 0;
  std::size_t d_ = 0;
  std::vector<double> data_;
};

/// k×k misclassification costs: zero diagonal, positive finite elsewhere.
class CostMatrix {
 public:
  CostMatrix() = default;
  /// Validates the invariants; `costs` is row-major k×k.
  CostMatrix(std::size_t num_classes, std::vector<double> costs);
  static CostMatrix uniform(std::size_t num_classes);

  std::size_t num_classes() const { return k_; }
  /// Cost of predicting class `predicted` for a sample of class `truth`
  /// (both 0-based).
  double operator()(std::size_t truth, std::size_t predicted) const {
    return costs_[truth * k_ + predicted];
  }
  std::span<const double> raw() const { return costs_; }
  bool operator==(const CostMatrix&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<double> costs_;
};

/// Learner hyperparameters. Each algorithm reads only the fields it uses.
struct Hyperparams {
  double C = 1.0;        // PA-I / SCW-I aggressiveness, ALMA step scale
  double gamma = 1.0;    // AROW, ARCSOGD, ARCSMC regularizer
  double lambda = 0.1;   // OGD / CSOGD learning rate
  std::optional<double> rho;  // CSOGD / ARCSOGD imbalance weight; running neg/pos ratio if unset
  double eta = 0.9;      // CW / SCW confidence probability, in (0.5, 1)
  double alma_alpha = 0.9;
  CovarianceMode covariance = CovarianceMode::kDiagonal;
  // Multiply ARCSMC updates by the class index as the algorithm listing is
  // printed. Off by default.
  bool literal_label_scaling = false;

  bool operator==(const Hyperparams&) const = default;
};

double dot(std::span<const double> weights, const FeatureVector& x);

struct BinaryPrediction {
  BinaryLabel label;
  double score;
};

/// sign(w·x) with sign(0) = −1.
BinaryPrediction predict_binary(std::span<const double> weights, const FeatureVector& x);
BinaryPrediction predict_binary(const LinearModel& model, const FeatureVector& x);
BinaryPrediction predict_binary(const GaussianLinearModel& model, const FeatureVector& x);

double margin(std::span<const double> weights, const FeatureVector& x, BinaryLabel y);
double hinge_loss(std::span<const double> weights, const FeatureVector& x, BinaryLabel y);

/// w += scale·x over the stored entries of x.
void axpy(double scale, const FeatureVector& x, std::span<double> w);

/// Element-wise bit pattern equality (distinguishes -0.0 from 0.0).
bool bitwise_equal(std::span<const double> a, std::span<const double> b);

}  // namespace csol
