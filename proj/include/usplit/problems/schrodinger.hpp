#pragma once

#include "usplit/problems/grid.hpp"
#include "usplit/problems/spectral.hpp"
#include "usplit/splitting/split_system.hpp"

namespace usplit {

/// Shifted Schrodinger operator (-1/2 nabla^2 + V_s + shift) on a periodic grid, unit mass.
struct SchrodingerSpec {
  std::vector<std::size_t> shape;
  std::vector<double> spacing;
  std::vector<double> potential;
  double shift = 0.0;
  /// Right-hand side for linear solves; zero when empty.
  std::vector<complex> source;
};

inline void validate(const SchrodingerSpec& s) {
  const auto n = grid_size(s.shape);
  if (s.shape.empty() || s.spacing.size() != s.shape.size()) throw InvalidArgument("schrodinger: bad grid");
  if (s.potential.size() != n) throw InvalidArgument("schrodinger: potential size does not match grid");
  if (!s.source.empty() && s.source.size() != n) throw InvalidArgument("schrodinger: source size does not match grid");
  for (double v : s.potential)
    if (!std::isfinite(v)) throw InvalidArgument("schrodinger: potential must be bounded");
  if (!std::isfinite(s.shift)) throw InvalidArgument("schrodinger: non-finite shift");
}

/// L = (|p|^2 / 2 + m) / c, V = (V_s + shift - m) / c with m the midpoint of the shifted
/// potential range and c = half-range / target_norm.
inline SplitSystem build_schrodinger_split(const SchrodingerSpec& spec, double target_norm = kDefaultTargetNorm,
                                           double alpha = kDefaultAlpha) {
  validate(spec);
  const std::size_t n = grid_size(spec.shape);
  std::vector<complex> shifted_v(n);
  for (std::size_t i = 0; i < n; ++i) shifted_v[i] = spec.potential[i] + spec.shift;
  const Circle circ = smallest_enclosing_circle_real_center(shifted_v);
  const double mid = circ.center.real();
  if (mid + circ.radius < 0.0) throw InvalidArgument("schrodinger: shifted potential must not be entirely negative");
  const double floor = std::max(std::abs(mid), 1.0);
  const ScaleRecord rec = compute_scalar_scale(circ, target_norm, 1.0, floor);
  const double c = rec.scalar->real();

  FftPlan plan(spec.shape);
  const auto p2 = squared_wavenumbers(spec.shape, spec.spacing);
  std::vector<complex> l_sym(n);
  for (std::size_t i = 0; i < n; ++i) l_sym[i] = (0.5 * p2[i] + mid) / c;
  auto shifted = [plan, l_sym](complex s) {
    std::vector<complex> sym(l_sym.size());
    for (std::size_t i = 0; i < sym.size(); ++i) {
      const complex d = l_sym[i] + s;
      if (d == complex{}) throw SingularOperator("schrodinger: L + s is singular");
      sym[i] = 1.0 / d;
    }
    return fourier_multiplier(plan, std::move(sym));
  };

  std::vector<complex> v(n);
  double vmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = (shifted_v[i] - mid) / c;
    vmax = std::max(vmax, std::abs(v[i]));
  }
  std::vector<complex> b(n);
  for (std::size_t i = 0; i < spec.source.size(); ++i) b[i] = spec.source[i] / c;

  auto split = make_split_system(fourier_multiplier(plan, l_sym), shifted, diagonal_map(std::move(v)),
                                 ComplexVector(std::move(b), spec.shape, spec.spacing), rec, vmax);
  split.alpha = alpha;
  split.bias = mid;
  return split;
}

/// Two coupled ring channels (potential 0) in a background of `depth`; rings of radius
/// `radius` and channel `width`, centred at (+-centre_offset, 0) on a square grid of side `size`.
inline SchrodingerSpec double_ring_spec(std::size_t n = 128, double size = 6.4, double depth = 10.0,
                                        double radius = 1.0, double width = 0.2, double centre_offset = 1.2,
                                        double shift = 0.0) {
  SchrodingerSpec s;
  s.shape = {n, n};
  const double h = size / static_cast<double>(n);
  s.spacing = {h, h};
  s.potential.assign(n * n, depth);
  s.shift = shift;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double x = (static_cast<double>(i) + 0.5) * h - 0.5 * size;
      const double y = (static_cast<double>(j) + 0.5) * h - 0.5 * size;
      for (double cx : {-centre_offset, centre_offset}) {
        const double r = std::hypot(x - cx, y);
        if (std::abs(r - radius) <= 0.5 * width) s.potential[i * n + j] = 0.0;
      }
    }
  return s;
}

}  // namespace usplit
