#include "csol/core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace csol {

FeatureVector FeatureVector::dense(std::span<const double> values) {
  FeatureVector fv;
  fv.dim_ = values.size();
  fv.indices_.resize(values.size());
  fv.values_.assign(values.begin(), values.end());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error("feature " + std::to_string(i) + " is not finite");
    }
    fv.indices_[i] = static_cast<std::uint32_t>(i);
  }
  return fv;
}

FeatureVector FeatureVector::sparse(std::size_t dim,
                                    std::vector<std::pair<std::uint32_t, double>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  FeatureVector fv;
  fv.dim_ = dim;
  fv.indices_.reserve(entries.size());
  fv.values_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto [index, value] = entries[i];
    if (index >= dim) {
      throw DimensionError("feature index " + std::to_string(index) +
                           " out of range for dimension " + std::to_string(dim));
    }
    if (i > 0 && entries[i - 1].first == index) {
      throw Error("duplicate feature index " + std::to_string(index));
    }
    if (!std::isfinite(value)) {
      throw Error("feature " + std::to_string(index) + " is not finite");
    }
    fv.indices_.push_back(index);
    fv.values_.push_back(value);
  }
  return fv;
}

double FeatureVector::squared_norm() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return sum;
}

std::vector<double> FeatureVector::to_dense() const {
  std::vector<double> out(dim_, 0.0);
  for (std::size_t i = 0; i < indices_.size(); ++i) out[indices_[i]] = values_[i];
  return out;
}

BinaryLabel::BinaryLabel(int value) : value_(value) {
  if (value != 1 && value != -1) {
    throw ConfigError("binary label must be -1 or +1, got " + std::to_string(value));
  }
}

ClassLabel::ClassLabel(int value, std::size_t num_classes) : value_(value), k_(num_classes) {
  if (value < 1 || static_cast<std::size_t>(value) > num_classes) {
    throw ConfigError("class label " + std::to_string(value) + " outside 1.." +
                      std::to_string(num_classes));
  }
}

std::string_view to_string(CovarianceMode mode) {
  return mode == CovarianceMode::kFull ? "full" : "diag";
}

CovarianceMode parse_covariance_mode(std::string_view text) {
  if (text == "diag" || text == "diagonal") return CovarianceMode::kDiagonal;
  if (text == "full") return CovarianceMode::kFull;
  throw ConfigError("unknown covariance mode '" + std::string(text) + "'");
}

Covariance::Covariance(std::size_t dim, CovarianceMode mode) : dim_(dim), mode_(mode) {
  if (mode == CovarianceMode::kFull) {
    data_.assign(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) data_[i * dim + i] = 1.0;
  } else {
    data_.assign(dim, 1.0);
  }
}

void Covariance::multiply(const FeatureVector& x, std::vector<double>& out) const {
  if (x.dim() != dim_) {
    throw DimensionError("covariance dimension " + std::to_string(dim_) +
                         " does not match feature dimension " + std::to_string(x.dim()));
  }
  out.assign(dim_, 0.0);
  const auto idx = x.indices();
  const auto val = x.values();
  if (mode_ == CovarianceMode::kDiagonal) {
    for (std::size_t n = 0; n < idx.size(); ++n) out[idx[n]] = data_[idx[n]] * val[n];
    return;
  }
  // Σ is symmetric, so accumulate columns as rows.
  for (std::size_t n = 0; n < idx.size(); ++n) {
    const double* row = data_.data() + static_cast<std::size_t>(idx[n]) * dim_;
    const double xj = val[n];
    for (std::size_t i = 0; i < dim_; ++i) out[i] += row[i] * xj;
  }
}

double Covariance::quadratic_form(const FeatureVector& x) const {
  if (x.dim() != dim_) {
    throw DimensionError("covariance dimension " + std::to_string(dim_) +
                         " does not match feature dimension " + std::to_string(x.dim()));
  }
  const auto idx = x.indices();
  const auto val = x.values();
  double sum = 0.0;
  if (mode_ == CovarianceMode::kDiagonal) {
    for (std::size_t n = 0; n < idx.size(); ++n) sum += data_[idx[n]] * val[n] * val[n];
    return sum;
  }
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const double* row = data_.data() + static_cast<std::size_t>(idx[a]) * dim_;
    double inner = 0.0;
    for (std::size_t b = 0; b < idx.size(); ++b) inner += row[idx[b]] * val[b];
    sum += val[a] * inner;
  }
  return sum;
}

void Covariance::downdate(const FeatureVector& x, std::span<const double> sigma_x, double beta) {
  if (mode_ == CovarianceMode::kDiagonal) {
    for (std::uint32_t i : x.indices()) data_[i] -= beta * sigma_x[i] * sigma_x[i];
    return;
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    const double si = beta * sigma_x[i];
    if (si == 0.0) continue;
    for (std::size_t j = i; j < dim_; ++j) {
      const double v = data_[i * dim_ + j] - si * sigma_x[j];
      data_[i * dim_ + j] = v;
      data_[j * dim_ + i] = v;
    }
  }
}

double Covariance::at(std::size_t i, std::size_t j) const {
  if (mode_ == CovarianceMode::kFull) return data_[i * dim_ + j];
  return i == j ? data_[i] : 0.0;
}

MulticlassModel::MulticlassModel(std::size_t num_classes, std::size_t dim)
    : k_(num_classes), d_(dim), data_(num_classes * dim, 0.0) {}

CostMatrix::CostMatrix(std::size_t num_classes, std::vector<double> costs)
    : k_(num_classes), costs_(std::move(costs)) {
  if (k_ < 2) throw ConfigError("cost matrix needs at least 2 classes");
  if (costs_.size() != k_ * k_) {
    throw ConfigError("cost matrix expects " + std::to_string(k_ * k_) + " entries, got " +
                      std::to_string(costs_.size()));
  }
  for (std::size_t i = 0; i < k_; ++i) {
    for (std::size_t j = 0; j < k_; ++j) {
      const double c = costs_[i * k_ + j];
      if (i == j && c != 0.0) {
        throw ConfigError("cost matrix diagonal must be 0 at class " + std::to_string(i + 1));
      }
      if (i != j && !(std::isfinite(c) && c > 0.0)) {
        throw ConfigError("cost c(" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                          ") must be positive and finite");
      }
    }
  }
}

CostMatrix CostMatrix::uniform(std::size_t num_classes) {
  std::vector<double> costs(num_classes * num_classes, 1.0);
  for (std::size_t i = 0; i < num_classes; ++i) costs[i * num_classes + i] = 0.0;
  return CostMatrix(num_classes, std::move(costs));
}

double dot(std::span<const double> weights, const FeatureVector& x) {
  if (weights.size() != x.dim()) {
    throw DimensionError("weight length " + std::to_string(weights.size()) +
                         " does not match feature dimension " + std::to_string(x.dim()));
  }
  const auto idx = x.indices();
  const auto val = x.values();
  double sum = 0.0;
  for (std::size_t n = 0; n < idx.size(); ++n) sum += weights[idx[n]] * val[n];
  return sum;
}

BinaryPrediction predict_binary(std::span<const double> weights, const FeatureVector& x) {
  const double score = dot(weights, x);
  return {score > 0.0 ? BinaryLabel::positive() : BinaryLabel::negative(), score};
}

BinaryPrediction predict_binary(const LinearModel& model, const FeatureVector& x) {
  return predict_binary(model.weights, x);
}

BinaryPrediction predict_binary(const GaussianLinearModel& model, const FeatureVector& x) {
  return predict_binary(model.mean, x);
}

double margin(std::span<const double> weights, const FeatureVector& x, BinaryLabel y) {
  return y.sign() * dot(weights, x);
}

double hinge_loss(std::span<const double> weights, const FeatureVector& x, BinaryLabel y) {
  return std::max(0.0, 1.0 - margin(weights, x, y));
}

void axpy(double scale, const FeatureVector& x, std::span<double> w) {
  const auto idx = x.indices();
  const auto val = x.values();
  for (std::size_t n = 0; n < idx.size(); ++n) w[idx[n]] += scale * val[n];
}

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

}  // namespace csol
