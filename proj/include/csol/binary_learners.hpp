#pragma once

// Binary online learners sharing one predict-then-learn step.
//
// First order: Perceptron, ALMA (p = 2), ROMMA, OGD, PA, PA-I, CSOGD.
// Second order (Gaussian weights): CW, AROW, SCW-I, ARCSOGD.

#include <cstddef>
#include <variant>
#include <vector>

#include "csol/algorithm.hpp"
#include "csol/core.hpp"

namespace csol {

struct StepOutcome {
  int predicted = 0;    // ±1 for binary learners, 1..k for multiclass
  double score = 0.0;   // w·x, or the winning row score for multiclass
  double loss = 0.0;    // the algorithm's own update criterion
  bool updated = false;
};

class BinaryLearner {
 public:
  BinaryLearner(Algorithm algo, std::size_t dim, Hyperparams params = {});

  BinaryPrediction predict(const FeatureVector& x) const;

  /// Warm start: replaces w (or μ) with `weights`.
  void set_weights(std::span<const double> weights);

  /// Predicts, then learns from the revealed label.
  StepOutcome step(const FeatureVector& x, BinaryLabel y);
  StepOutcome step(const LabeledExample& ex) { return step(ex.x, BinaryLabel(ex.label)); }

  Algorithm algorithm() const { return algo_; }
  const Hyperparams& params() const { return params_; }
  std::size_t dim() const { return dim_; }
  std::size_t rounds() const { return rounds_; }
  std::size_t degenerate_events() const { return degenerate_events_; }

  /// w for first-order learners, μ for Gaussian ones.
  std::span<const double> weights() const;
  /// Null for first-order learners.
  const Covariance* covariance() const;
  const std::variant<LinearModel, GaussianLinearModel>& model() const { return model_; }

  /// Imbalance weight the cost-sensitive loss would use right now.
  double current_rho() const;

  /// Bit-level equality of the model and the update-driven auxiliaries
  /// (ALMA's update counter, ROMMA's cached norm). Round and label counters
  /// are excluded.
  bool same_state(const BinaryLearner& other) const;

 private:
  std::vector<double>& w();
  StepOutcome step_first_order(const FeatureVector& x, BinaryLabel y, StepOutcome out);
  StepOutcome step_second_order(const FeatureVector& x, BinaryLabel y, StepOutcome out);
  void check_finite(double value, const char* what) const;

  Algorithm algo_;
  Hyperparams params_;
  std::size_t dim_;
  std::variant<LinearModel, GaussianLinearModel> model_;

  std::size_t rounds_ = 0;
  std::size_t positives_ = 0;
  std::size_t negatives_ = 0;
  std::size_t degenerate_events_ = 0;
  std::size_t alma_updates_ = 1;
  double romma_norm2_ = 0.0;
  double phi_ = 0.0;
  std::vector<double> scratch_;
};

}  // namespace csol
