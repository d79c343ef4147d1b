#pragma once

#include <Eigen/Dense>
#include <optional>

#include "usplit/splitting/circle.hpp"

namespace usplit {

inline constexpr double kDefaultTargetNorm = 0.95;

/// How the raw system was divided to reach the canonical form. Exactly one of
/// `scalar` and `diagonal` is set.
struct ScaleRecord {
  std::optional<complex> scalar;
  std::optional<std::vector<double>> diagonal;
  double target_norm = kDefaultTargetNorm;
  /// Set when no heterogeneity was present and the magnitude came from a floor value.
  bool degenerate = false;
};

/// Complex scale c = (radius / target_norm) * rotation, so |raw V| / |c| <= target_norm
/// pointwise. `rotation` is the unit phase that turns the raw numerical range into the
/// right half-plane; the Helmholtz choice is i, giving c = -radius / (target_norm i).
/// With radius 0 the magnitude is taken from `floor` and the record is flagged degenerate.
inline ScaleRecord compute_scalar_scale(const Circle& circle, double target_norm = kDefaultTargetNorm,
                                        complex rotation = 1.0, double floor = 1.0) {
  if (!(target_norm > 0.0 && target_norm < 1.0))
    throw InvalidArgument("compute_scalar_scale: target_norm must lie in (0, 1)");
  if (std::abs(std::abs(rotation) - 1.0) > 1e-12)
    throw InvalidArgument("compute_scalar_scale: rotation must be a unit phase");
  ScaleRecord rec;
  rec.target_norm = target_norm;
  if (circle.radius > 0.0) {
    rec.scalar = circle.radius / target_norm * rotation;
  } else {
    if (!(floor > 0.0)) throw InvalidArgument("compute_scalar_scale: floor must be positive");
    rec.scalar = floor / target_norm * rotation;
    rec.degenerate = true;
  }
  return rec;
}

namespace detail {

/// max(row max, column max) per index of D delta D, for D = diag(d).
inline std::vector<double> scaled_line_maxima(const Eigen::MatrixXd& delta, const std::vector<double>& d) {
  const auto n = static_cast<std::size_t>(delta.rows());
  std::vector<double> m(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double v = d[i] * delta(i, j) * d[j];
      m[i] = std::max(m[i], v);
      m[j] = std::max(m[j], v);
    }
  return m;
}

inline double max_ratio(const std::vector<double>& m) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double v : m)
    if (v > 0.0) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return hi > 0.0 ? hi / lo : 1.0;
}

}  // namespace detail

/// Result of equilibrate(): the diagonal Sigma and the achieved max/min ratio of the
/// per-index line maxima of Sigma^{-1/2} delta Sigma^{-1/2}.
struct Equilibration {
  std::vector<double> sigma;
  double ratio = 1.0;
  std::size_t sweeps = 0;
};

/// Symmetric max-norm (Ruiz) equilibration of a non-negative square matrix.
///
/// Finds positive Sigma such that Sigma^{-1/2} delta Sigma^{-1/2} has row/column maxima
/// within a factor 2 of each other. Indices whose row and column are entirely zero keep
/// Sigma = 1.
inline Equilibration equilibrate(const Eigen::MatrixXd& delta, std::size_t max_sweeps = 50) {
  if (delta.rows() != delta.cols()) throw InvalidArgument("equilibrate: matrix must be square");
  if ((delta.array() < 0.0).any() || !delta.allFinite())
    throw InvalidArgument("equilibrate: entries must be finite and non-negative");
  const auto n = static_cast<std::size_t>(delta.rows());
  std::vector<double> d(n, 1.0);
  Equilibration out;
  auto m = detail::scaled_line_maxima(delta, d);
  for (; out.sweeps < max_sweeps && detail::max_ratio(m) > 2.0; ++out.sweeps) {
    for (std::size_t i = 0; i < n; ++i)
      if (m[i] > 0.0) d[i] /= std::sqrt(m[i]);
    m = detail::scaled_line_maxima(delta, d);
  }
  // One more sweep pulls the maxima towards 1; kept only if it does not worsen the ratio.
  auto trial = d;
  for (std::size_t i = 0; i < n; ++i)
    if (m[i] > 0.0) trial[i] /= std::sqrt(m[i]);
  const auto trial_m = detail::scaled_line_maxima(delta, trial);
  if (detail::max_ratio(trial_m) <= detail::max_ratio(m)) {
    d = trial;
    m = trial_m;
  }
  out.ratio = detail::max_ratio(m);
  out.sigma.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.sigma[i] = 1.0 / (d[i] * d[i]);
  return out;
}

}  // namespace usplit
