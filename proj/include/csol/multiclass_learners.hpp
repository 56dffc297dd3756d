#pragma once

// Multiclass online learners over a k×d compound weight matrix.
//
// Every update touches two rows: the true class moves toward x and the most
// confused rival moves away by the same amount (ROMMA additionally rescales
// the whole matrix). ARCSMC and the AROW baseline share one covariance
// across all rows.

#include <cstddef>
#include <optional>
#include <vector>

#include "csol/algorithm.hpp"
#include "csol/binary_learners.hpp"
#include "csol/core.hpp"

namespace csol {

struct MulticlassPrediction {
  ClassLabel label;
  std::vector<double> scores;
};

/// argmax_i W_i·x, ties to the smallest class index.
MulticlassPrediction mc_predict(const MulticlassModel& model, const FeatureVector& x);

/// argmax over i ≠ y of the given scores, ties to the smallest index.
ClassLabel most_confused_class(std::span<const double> scores, ClassLabel y);
ClassLabel most_confused_class(const MulticlassModel& model, const FeatureVector& x,
                               ClassLabel y);

/// max(0, 1 − (W_y·x − max_{i≠y} W_i·x)).
double mc_hinge_loss(const MulticlassModel& model, const FeatureVector& x, ClassLabel y);

/// max(0, c(y, p) − (W_y·x − W_p·x)) with p the most confused class.
double cs_mc_loss(const MulticlassModel& model, const CostMatrix& costs, const FeatureVector& x,
                  ClassLabel y);

class MulticlassLearner {
 public:
  /// ARCSMC requires `costs`; the other families ignore it.
  MulticlassLearner(Algorithm algo, std::size_t num_classes, std::size_t dim,
                    Hyperparams params = {}, std::optional<CostMatrix> costs = std::nullopt);

  MulticlassPrediction predict(const FeatureVector& x) const { return mc_predict(model_, x); }

  /// Warm start: replaces W.
  void set_model(MulticlassModel model);

  StepOutcome step(const FeatureVector& x, ClassLabel y);
  StepOutcome step(const LabeledExample& ex) { return step(ex.x, ClassLabel(ex.label, k_)); }

  Algorithm algorithm() const { return algo_; }
  const Hyperparams& params() const { return params_; }
  std::size_t num_classes() const { return k_; }
  std::size_t dim() const { return d_; }
  std::size_t rounds() const { return rounds_; }
  std::size_t degenerate_events() const { return degenerate_events_; }

  const MulticlassModel& model() const { return model_; }
  const Covariance* covariance() const { return cov_ ? &*cov_ : nullptr; }
  const std::optional<CostMatrix>& costs() const { return costs_; }

  /// Bit-level equality of W and Σ.
  bool same_state(const MulticlassLearner& other) const;

 private:
  void check_finite(double value, const char* what) const;
  void shift_rows(std::size_t up, std::size_t down, double amount, std::span<const double> dir);
  void shift_rows(std::size_t up, std::size_t down, double amount, const FeatureVector& x);

  Algorithm algo_;
  Hyperparams params_;
  std::size_t k_;
  std::size_t d_;
  MulticlassModel model_;
  std::optional<Covariance> cov_;
  std::optional<CostMatrix> costs_;
  std::size_t rounds_ = 0;
  std::size_t degenerate_events_ = 0;
  double phi_ = 0.0;
  std::vector<double> scores_;
  std::vector<double> scratch_;
};

}  // namespace csol
