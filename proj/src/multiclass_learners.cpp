#include "csol/multiclass_learners.hpp"

#include <algorithm>
#include <cmath>

#include "confidence.hpp"

namespace csol {
namespace {

void compute_scores(const MulticlassModel& model, const FeatureVector& x,
                    std::vector<double>& scores) {
  if (x.dim() != model.dim()) {
    throw DimensionError("example dimension " + std::to_string(x.dim()) +
                         " does not match model dimension " + std::to_string(model.dim()));
  }
  scores.resize(model.num_classes());
  for (std::size_t i = 0; i < model.num_classes(); ++i) scores[i] = dot(model.row(i), x);
}

std::size_t argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

std::size_t rival_index(std::span<const double> scores, std::size_t truth) {
  std::size_t best = truth == 0 ? 1 : 0;
  for (std::size_t i = best + 1; i < scores.size(); ++i) {
    if (i != truth && scores[i] > scores[best]) best = i;
  }
  return best;
}

}  // namespace

MulticlassPrediction mc_predict(const MulticlassModel& model, const FeatureVector& x) {
  std::vector<double> scores;
  compute_scores(model, x, scores);
  const auto best = argmax(scores);
  return {ClassLabel(static_cast<int>(best) + 1, model.num_classes()), std::move(scores)};
}

ClassLabel most_confused_class(std::span<const double> scores, ClassLabel y) {
  if (scores.size() < 2) throw ConfigError("most confused class needs at least 2 classes");
  if (y.index() >= scores.size()) throw ConfigError("true class outside score vector");
  return ClassLabel(static_cast<int>(rival_index(scores, y.index())) + 1, scores.size());
}

ClassLabel most_confused_class(const MulticlassModel& model, const FeatureVector& x,
                               ClassLabel y) {
  std::vector<double> scores;
  compute_scores(model, x, scores);
  return most_confused_class(scores, y);
}

double mc_hinge_loss(const MulticlassModel& model, const FeatureVector& x, ClassLabel y) {
  std::vector<double> scores;
  compute_scores(model, x, scores);
  const auto p = rival_index(scores, y.index());
  return std::max(0.0, 1.0 - (scores[y.index()] - scores[p]));
}

double cs_mc_loss(const MulticlassModel& model, const CostMatrix& costs, const FeatureVector& x,
                  ClassLabel y) {
  if (costs.num_classes() != model.num_classes()) {
    throw ConfigError("cost matrix size does not match the number of classes");
  }
  std::vector<double> scores;
  compute_scores(model, x, scores);
  const auto p = rival_index(scores, y.index());
  return std::max(0.0, costs(y.index(), p) - (scores[y.index()] - scores[p]));
}

MulticlassLearner::MulticlassLearner(Algorithm algo, std::size_t num_classes, std::size_t dim,
                                     Hyperparams params, std::optional<CostMatrix> costs)
    : algo_(algo), params_(params), k_(num_classes), d_(dim), model_(num_classes, dim) {
  if (!supports_multiclass(algo)) {
    throw ConfigError(std::string(to_string(algo)) + " has no multiclass variant");
  }
  if (num_classes < 2) throw ConfigError("multiclass learner needs at least 2 classes");
  if (dim == 0) throw ConfigError("model dimension must be positive");
  validate(algo, params_);
  if (algo == Algorithm::kArcsmc) {
    if (!costs) throw ConfigError("arcsmc requires a cost matrix");
    if (costs->num_classes() != num_classes) {
      throw ConfigError("cost matrix size does not match the number of classes");
    }
    costs_ = std::move(costs);
  }
  if (is_second_order(algo)) cov_.emplace(dim, params_.covariance);
  if (algo == Algorithm::kScw) phi_ = detail::confidence_quantile(params_.eta);
}

void MulticlassLearner::set_model(MulticlassModel model) {
  if (model.num_classes() != k_ || model.dim() != d_) {
    throw DimensionError("warm-start model has the wrong shape");
  }
  model_ = std::move(model);
}

bool MulticlassLearner::same_state(const MulticlassLearner& other) const {
  if (algo_ != other.algo_ || k_ != other.k_ || d_ != other.d_) return false;
  if (!bitwise_equal(model_.raw(), other.model_.raw())) return false;
  if (cov_.has_value() != other.cov_.has_value()) return false;
  return !cov_ || bitwise_equal(cov_->raw(), other.cov_->raw());
}

void MulticlassLearner::check_finite(double value, const char* what) const {
  if (!std::isfinite(value)) {
    throw NumericalError(std::string(to_string(algo_)) + ": non-finite " + what, rounds_);
  }
}

void MulticlassLearner::shift_rows(std::size_t up, std::size_t down, double amount,
                                   std::span<const double> dir) {
  auto hi = model_.row(up);
  auto lo = model_.row(down);
  for (std::size_t i = 0; i < d_; ++i) {
    const double delta = amount * dir[i];
    hi[i] += delta;
    lo[i] -= delta;
  }
}

void MulticlassLearner::shift_rows(std::size_t up, std::size_t down, double amount,
                                   const FeatureVector& x) {
  axpy(amount, x, model_.row(up));
  axpy(-amount, x, model_.row(down));
}

StepOutcome MulticlassLearner::step(const FeatureVector& x, ClassLabel y) {
  if (y.num_classes() != k_) throw ConfigError("class label built for a different k");
  compute_scores(model_, x, scores_);
  ++rounds_;

  const std::size_t predicted = argmax(scores_);
  const std::size_t truth = y.index();
  const std::size_t rival = rival_index(scores_, truth);
  const double diff = scores_[truth] - scores_[rival];

  StepOutcome out;
  out.predicted = static_cast<int>(predicted) + 1;
  out.score = scores_[predicted];

  switch (algo_) {
    case Algorithm::kPerceptron: {
      if (predicted == truth) return out;
      out.loss = 1.0;
      shift_rows(truth, rival, 1.0, x);
      out.updated = true;
      return out;
    }
    case Algorithm::kPaI: {
      out.loss = std::max(0.0, 1.0 - diff);
      if (out.loss <= 0.0) return out;
      const double norm2 = x.squared_norm();
      if (norm2 == 0.0) {
        ++degenerate_events_;
        return out;
      }
      const double tau = std::min(params_.C, out.loss / (2.0 * norm2));
      check_finite(tau, "step size");
      shift_rows(truth, rival, tau, x);
      out.updated = true;
      return out;
    }
    case Algorithm::kOgd: {
      out.loss = std::max(0.0, 1.0 - diff);
      if (out.loss <= 0.0) return out;
      shift_rows(truth, rival, params_.lambda / std::sqrt(static_cast<double>(rounds_)), x);
      out.updated = true;
      return out;
    }
    case Algorithm::kRomma: {
      if (predicted == truth) return out;
      out.loss = 1.0;
      // Binary ROMMA on the flattened W with joint feature e_y⊗x − e_p⊗x.
      const double xx = 2.0 * x.squared_norm();
      if (xx == 0.0) {
        ++degenerate_events_;
        return out;
      }
      double ww = 0.0;
      for (double v : model_.raw()) ww += v * v;
      const double denom = xx * ww - diff * diff;
      if (ww == 0.0) {
        shift_rows(truth, rival, 1.0 / xx, x);
      } else if (denom <= 1e-12 * xx * ww) {
        shift_rows(truth, rival, (1.0 - diff) / xx, x);
      } else {
        const double c = (xx * ww - diff) / denom;
        const double d = ww * (1.0 - diff) / denom;
        check_finite(c, "ROMMA scale");
        check_finite(d, "ROMMA step");
        for (std::size_t i = 0; i < k_; ++i) {
          for (double& v : model_.row(i)) v *= c;
        }
        shift_rows(truth, rival, d, x);
      }
      out.updated = true;
      return out;
    }
    case Algorithm::kArow:
    case Algorithm::kArcsmc:
    case Algorithm::kScw: {
      const double v = cov_->quadratic_form(x);
      double alpha = 0.0;
      double beta = 0.0;
      if (algo_ == Algorithm::kScw) {
        out.loss = detail::confidence_loss(diff, v, phi_);
        if (out.loss <= 0.0) return out;
        alpha = std::min(params_.C, detail::confidence_alpha(diff, v, phi_));
        if (alpha <= 0.0) return out;
        beta = detail::confidence_beta(alpha, v, phi_);
      } else {
        const double cost = algo_ == Algorithm::kArcsmc ? (*costs_)(truth, rival) : 1.0;
        out.loss = std::max(0.0, cost - diff);
        if (out.loss <= 0.0) return out;
        beta = 1.0 / (v + params_.gamma);
        alpha = out.loss * beta;
        if (algo_ == Algorithm::kArcsmc && params_.literal_label_scaling) {
          alpha *= static_cast<double>(y.value());
        }
      }
      check_finite(alpha, "alpha");
      check_finite(beta, "beta");
      cov_->multiply(x, scratch_);
      shift_rows(truth, rival, alpha, scratch_);
      cov_->downdate(x, scratch_, beta);
      out.updated = true;
      return out;
    }
    default:
      throw ConfigError("unsupported multiclass algorithm");
  }
}

}  // namespace csol
