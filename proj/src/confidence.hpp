#pragma once

// Closed-form step sizes shared by the binary and multiclass confidence
// weighted learners. `m` is the signed margin, `v` the margin variance xᵀΣx.

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

namespace csol::detail {

inline double confidence_quantile(double eta) {
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), eta);
}

/// CW / SCW-I loss: max(0, φ√v − m).
inline double confidence_loss(double m, double v, double phi) {
  return std::max(0.0, phi * std::sqrt(v) - m);
}

/// Mean step of exact CW; SCW-I caps it at C.
inline double confidence_alpha(double m, double v, double phi) {
  if (v <= 0.0) return 0.0;
  const double phi2 = phi * phi;
  const double psi = 1.0 + phi2 / 2.0;
  const double zeta = 1.0 + phi2;
  const double root = std::sqrt(m * m * phi2 * phi2 / 4.0 + v * phi2 * zeta);
  return std::max(0.0, (-m * psi + root) / (v * zeta));
}

/// Covariance step matching `alpha`.
inline double confidence_beta(double alpha, double v, double phi) {
  const double avp = alpha * v * phi;
  const double root = -avp + std::sqrt(avp * avp + 4.0 * v);
  const double u = root * root / 4.0;
  return alpha * phi / (std::sqrt(u) + avp);
}

}  // namespace csol::detail
