#include "csol/binary_learners.hpp"

#include <algorithm>
#include <cmath>

#include "confidence.hpp"

namespace csol {

BinaryLearner::BinaryLearner(Algorithm algo, std::size_t dim, Hyperparams params)
    : algo_(algo), params_(params), dim_(dim) {
  if (!supports_binary(algo)) {
    throw ConfigError(std::string(to_string(algo)) + " is not a binary learner");
  }
  if (dim == 0) throw ConfigError("model dimension must be positive");
  validate(algo, params_);
  if (is_second_order(algo)) {
    model_ = GaussianLinearModel(dim, params_.covariance);
  } else {
    model_ = LinearModel(dim);
  }
  if (algo == Algorithm::kCw || algo == Algorithm::kScw) {
    phi_ = detail::confidence_quantile(params_.eta);
  }
}

std::span<const double> BinaryLearner::weights() const {
  if (const auto* g = std::get_if<GaussianLinearModel>(&model_)) return g->mean;
  return std::get<LinearModel>(model_).weights;
}

std::vector<double>& BinaryLearner::w() {
  if (auto* g = std::get_if<GaussianLinearModel>(&model_)) return g->mean;
  return std::get<LinearModel>(model_).weights;
}

void BinaryLearner::set_weights(std::span<const double> weights) {
  if (weights.size() != dim_) throw DimensionError("warm-start weights have the wrong length");
  w().assign(weights.begin(), weights.end());
  double w2 = 0.0;
  for (double v : weights) w2 += v * v;
  romma_norm2_ = w2;
}

const Covariance* BinaryLearner::covariance() const {
  if (const auto* g = std::get_if<GaussianLinearModel>(&model_)) return &g->covariance;
  return nullptr;
}

double BinaryLearner::current_rho() const {
  if (params_.rho) return *params_.rho;
  if (positives_ == 0 || negatives_ == 0) return 1.0;
  return static_cast<double>(negatives_) / static_cast<double>(positives_);
}

bool BinaryLearner::same_state(const BinaryLearner& other) const {
  if (algo_ != other.algo_ || dim_ != other.dim_) return false;
  if (!bitwise_equal(weights(), other.weights())) return false;
  const Covariance* a = covariance();
  const Covariance* b = other.covariance();
  if ((a == nullptr) != (b == nullptr)) return false;
  if (a != nullptr && !bitwise_equal(a->raw(), b->raw())) return false;
  return alma_updates_ == other.alma_updates_ &&
         bitwise_equal(std::span(&romma_norm2_, 1), std::span(&other.romma_norm2_, 1));
}

BinaryPrediction BinaryLearner::predict(const FeatureVector& x) const {
  return predict_binary(weights(), x);
}

void BinaryLearner::check_finite(double value, const char* what) const {
  if (!std::isfinite(value)) {
    throw NumericalError(std::string(to_string(algo_)) + ": non-finite " + what, rounds_);
  }
}

StepOutcome BinaryLearner::step(const FeatureVector& x, BinaryLabel y) {
  if (x.dim() != dim_) {
    throw DimensionError("example dimension " + std::to_string(x.dim()) +
                         " does not match model dimension " + std::to_string(dim_));
  }
  ++rounds_;
  if (y.is_positive()) {
    ++positives_;
  } else {
    ++negatives_;
  }
  const BinaryPrediction pred = predict(x);
  StepOutcome out;
  out.predicted = pred.label.value();
  out.score = pred.score;
  if (is_second_order(algo_)) return step_second_order(x, y, out);
  return step_first_order(x, y, out);
}

StepOutcome BinaryLearner::step_first_order(const FeatureVector& x, BinaryLabel y,
                                            StepOutcome out) {
  auto& weights = w();
  const double ys = y.sign();
  const double m = ys * out.score;

  switch (algo_) {
    case Algorithm::kPerceptron: {
      if (out.predicted == y.value()) return out;
      out.loss = 1.0;
      axpy(ys, x, weights);
      out.updated = true;
      return out;
    }
    case Algorithm::kPa:
    case Algorithm::kPaI: {
      out.loss = std::max(0.0, 1.0 - m);
      if (out.loss <= 0.0) return out;
      const double norm2 = x.squared_norm();
      if (norm2 == 0.0) {
        ++degenerate_events_;
        return out;
      }
      double tau = out.loss / norm2;
      if (algo_ == Algorithm::kPaI) tau = std::min(params_.C, tau);
      check_finite(tau, "step size");
      axpy(tau * ys, x, weights);
      out.updated = true;
      return out;
    }
    case Algorithm::kOgd:
    case Algorithm::kCsogd: {
      const double target =
          (algo_ == Algorithm::kCsogd && y.is_positive()) ? current_rho() : 1.0;
      out.loss = std::max(0.0, target - m);
      if (out.loss <= 0.0) return out;
      const double rate = params_.lambda / std::sqrt(static_cast<double>(rounds_));
      axpy(rate * ys, x, weights);
      out.updated = true;
      return out;
    }
    case Algorithm::kAlma: {
      const double norm2 = x.squared_norm();
      const double k = static_cast<double>(alma_updates_);
      const double threshold = (1.0 - params_.alma_alpha) / params_.alma_alpha / std::sqrt(k);
      if (norm2 == 0.0) {
        // No direction to normalize; the margin is 0 against a positive
        // threshold.
        out.loss = threshold;
        if (threshold > 0.0) ++degenerate_events_;
        return out;
      }
      const double norm = std::sqrt(norm2);
      out.loss = std::max(0.0, threshold - m / norm);
      if (out.loss <= 0.0) return out;
      const double rate = params_.C / std::sqrt(k);
      axpy(rate * ys / norm, x, weights);
      double w2 = 0.0;
      for (double v : weights) w2 += v * v;
      if (w2 > 1.0) {
        const double scale = 1.0 / std::sqrt(w2);
        for (double& v : weights) v *= scale;
      }
      ++alma_updates_;
      out.updated = true;
      return out;
    }
    case Algorithm::kRomma: {
      if (out.predicted == y.value()) return out;
      out.loss = 1.0;
      const double xx = x.squared_norm();
      if (xx == 0.0) {
        ++degenerate_events_;
        return out;
      }
      const double ww = romma_norm2_;
      const double wx = out.score;
      const double denom = xx * ww - wx * wx;
      if (ww == 0.0) {
        axpy(ys / xx, x, weights);
      } else if (denom <= 1e-12 * xx * ww) {
        // x parallel to w: the two ROMMA constraints collapse, take the
        // minimal step reaching margin 1.
        axpy((1.0 - m) / xx * ys, x, weights);
      } else {
        const double c = (xx * ww - ys * wx) / denom;
        const double d = ww * (ys - wx) / denom;
        check_finite(c, "ROMMA scale");
        check_finite(d, "ROMMA step");
        for (double& v : weights) v *= c;
        axpy(d, x, weights);
      }
      double w2 = 0.0;
      for (double v : weights) w2 += v * v;
      check_finite(w2, "weight norm");
      romma_norm2_ = w2;
      out.updated = true;
      return out;
    }
    default:
      throw ConfigError("unsupported first-order algorithm");
  }
}

StepOutcome BinaryLearner::step_second_order(const FeatureVector& x, BinaryLabel y,
                                             StepOutcome out) {
  auto& g = std::get<GaussianLinearModel>(model_);
  const double ys = y.sign();
  const double m = ys * out.score;
  const double v = g.covariance.quadratic_form(x);

  double alpha = 0.0;
  double beta = 0.0;
  switch (algo_) {
    case Algorithm::kArow:
    case Algorithm::kArcsogd: {
      const double target =
          (algo_ == Algorithm::kArcsogd && y.is_positive()) ? current_rho() : 1.0;
      out.loss = std::max(0.0, target - m);
      if (out.loss <= 0.0) return out;
      beta = 1.0 / (v + params_.gamma);
      alpha = out.loss * beta;
      break;
    }
    case Algorithm::kCw:
    case Algorithm::kScw: {
      out.loss = detail::confidence_loss(m, v, phi_);
      if (out.loss <= 0.0) return out;
      alpha = detail::confidence_alpha(m, v, phi_);
      if (algo_ == Algorithm::kScw) alpha = std::min(params_.C, alpha);
      if (alpha <= 0.0) return out;
      beta = detail::confidence_beta(alpha, v, phi_);
      break;
    }
    default:
      throw ConfigError("unsupported second-order algorithm");
  }
  check_finite(alpha, "alpha");
  check_finite(beta, "beta");

  g.covariance.multiply(x, scratch_);
  for (std::size_t i = 0; i < dim_; ++i) g.mean[i] += alpha * ys * scratch_[i];
  g.covariance.downdate(x, scratch_, beta);
  out.updated = true;
  return out;
}

}  // namespace csol
