#pragma once

#include <algorithm>
#include <random>

#include "usplit/core/dense.hpp"

namespace usplit {

struct NormEstimate {
  double value = 0.0;
  std::size_t iterations = 0;
  /// False when the iteration budget ran out before the relative change fell below tol.
  bool converged = false;
  /// True when the value came from a dense SVD rather than power iteration.
  bool exact = false;
};

/// Largest singular value of `map`.
///
/// With an adjoint this runs power iteration on map^H map; without one the operator is
/// realised densely (only allowed up to kDenseOracleCap) and the SVD value is returned.
inline NormEstimate operator_norm_estimate(const LinearMap& map, std::size_t max_iters = 2000,
                                           double tol = 1e-10, std::uint64_t seed = 7) {
  if (!map.has_adjoint()) {
    if (map.dim() > kDenseOracleCap)
      throw MissingCapability("operator_norm_estimate: needs an adjoint above the dense cap");
    return {realize(map).norm(), 0, true, true};
  }
  std::mt19937_64 rng(seed);
  auto v = random_unit_vector(map.dim(), rng);
  auto w = ComplexVector::zeros_like(v);
  auto z = ComplexVector::zeros_like(v);
  double sigma = 0.0;
  for (std::size_t k = 1; k <= max_iters; ++k) {
    map.apply(v.span(), w.span());
    const double s = norm(w);
    if (s == 0.0) return {0.0, k, true, false};
    map.apply_adjoint(w.span(), z.span());
    const double zn = norm(z);
    // ||A v|| is a lower bound converging to sigma_max; the Rayleigh value s^2 = <v, A^H A v>.
    const double next = std::max(s, std::sqrt(zn));
    if (k > 1 && std::abs(next - sigma) <= tol * next) return {next, k, true, false};
    sigma = next;
    if (zn == 0.0) return {sigma, k, true, false};
    for (std::size_t i = 0; i < z.size(); ++i) v[i] = z[i] / zn;
  }
  return {sigma, max_iters, false, false};
}

/// Upper bound on Re[map] = inf Re<x, map x> over unit x.
///
/// For dim <= kDenseOracleCap the exact infimum (smallest eigenvalue of the Hermitian part)
/// is returned; otherwise the minimum over `n_samples` seeded random unit probes.
inline double accretivity_lower_bound(const LinearMap& map, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw InvalidArgument("accretivity_lower_bound: n_samples must be positive");
  if (map.dim() <= kDenseOracleCap) return hermitian_min_eigenvalue(realize(map).entries);
  std::mt19937_64 rng(seed);
  double best = std::numeric_limits<double>::infinity();
  ComplexVector y(map.dim());
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto x = random_unit_vector(map.dim(), rng);
    map.apply(x.span(), y.span());
    best = std::min(best, dot(x, y).real());
  }
  return best;
}

/// Largest deviation from linearity over `probes` random pairs, relative to the input scale.
inline double linearity_defect(const LinearMap& map, std::size_t probes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (std::size_t p = 0; p < probes; ++p) {
    const auto x = random_vector(map.dim(), rng);
    const auto y = random_vector(map.dim(), rng);
    const complex a(0.3, -1.2), b(-0.7, 0.4);
    const auto lhs = map(a * x + b * y);
    const auto rhs = a * map(x) + b * map(y);
    const double scale = std::max({norm(lhs), norm(rhs), 1e-300});
    worst = std::max(worst, norm(lhs - rhs) / scale);
  }
  return worst;
}

/// Largest relative mismatch |<y, A x> - <A^H y, x>| over random probes.
inline double adjoint_defect(const LinearMap& map, std::size_t probes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (std::size_t p = 0; p < probes; ++p) {
    const auto x = random_vector(map.dim(), rng);
    const auto y = random_vector(map.dim(), rng);
    const auto ax = map(x);
    const auto ahy = map.adjoint(y);
    const complex l = dot(y, ax), r = dot(ahy, x);
    const double scale = std::max(norm(ax) * norm(y) + norm(ahy) * norm(x), 1e-300);
    worst = std::max(worst, std::abs(l - r) / scale);
  }
  return worst;
}

}  // namespace usplit
