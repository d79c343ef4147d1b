#pragma once

#include <algorithm>
#include <random>
#include <span>
#include <vector>

#include "usplit/core/vector.hpp"

namespace usplit {

/// Disk in the complex plane. The centre serves as the bias absorbed into L, the radius
/// as the pointwise bound on the remaining discrepancy.
struct Circle {
  complex center{0.0, 0.0};
  double radius = 0.0;

  bool contains(complex z, double rel_tol = 1e-12) const {
    const double slack = rel_tol * std::max({radius, std::abs(center), 1e-300});
    return std::abs(z - center) <= radius + slack;
  }
};

namespace detail {

inline Circle circle_from(complex a, complex b) { return {0.5 * (a + b), 0.5 * std::abs(a - b)}; }

/// Circumcircle of three points; falls back to the widest pair when they are collinear.
inline Circle circle_from(complex a, complex b, complex c) {
  const complex bp = b - a, cp = c - a;
  const double d = 2.0 * (bp.real() * cp.imag() - bp.imag() * cp.real());
  const double scale = std::max({std::norm(bp), std::norm(cp), 1e-300});
  if (std::abs(d) <= 1e-14 * scale) {
    Circle best = circle_from(a, b);
    for (const auto& cand : {circle_from(a, c), circle_from(b, c)})
      if (cand.radius > best.radius) best = cand;
    return best;
  }
  const double b2 = std::norm(bp), c2 = std::norm(cp);
  const complex u((cp.imag() * b2 - bp.imag() * c2) / d, (bp.real() * c2 - cp.real() * b2) / d);
  return {a + u, std::abs(u)};
}

}  // namespace detail

/// Minimal enclosing circle of a finite point set (Welzl's randomised incremental
/// algorithm, expected linear time). The shuffle uses a fixed seed, so results are
/// deterministic.
inline Circle smallest_enclosing_circle(std::span<const complex> points) {
  if (points.empty()) throw InvalidArgument("smallest_enclosing_circle: empty point set");
  for (const auto& p : points)
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
      throw InvalidArgument("smallest_enclosing_circle: non-finite point");

  // Duplicates are common in sampled media (piecewise-constant fields); drop them first.
  std::vector<complex> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](complex a, complex b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::mt19937_64 rng(0x5eed);
  std::shuffle(pts.begin(), pts.end(), rng);

  Circle c{pts[0], 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (c.contains(pts[i])) continue;
    c = {pts[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (c.contains(pts[j])) continue;
      c = detail::circle_from(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k)
        if (!c.contains(pts[k])) c = detail::circle_from(pts[i], pts[j], pts[k]);
    }
  }
  return c;
}

/// Smallest enclosing circle whose centre is constrained to the real axis.
///
/// max_i |z_i - t| is convex in t, so a golden-section search over the span of real parts
/// converges to the optimum.
inline Circle smallest_enclosing_circle_real_center(std::span<const complex> points) {
  if (points.empty()) throw InvalidArgument("smallest_enclosing_circle_real_center: empty point set");
  auto radius_at = [&](double t) {
    double r = 0.0;
    for (const auto& p : points) r = std::max(r, std::abs(p - complex(t, 0.0)));
    return r;
  };
  double lo = points[0].real(), hi = lo;
  for (const auto& p : points) {
    lo = std::min(lo, p.real());
    hi = std::max(hi, p.real());
  }
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = radius_at(x1), f2 = radius_at(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = radius_at(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = radius_at(x2);
    }
  }
  const double t = 0.5 * (a + b);
  return {complex(t, 0.0), radius_at(t)};
}

}  // namespace usplit
