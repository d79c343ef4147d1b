#pragma once

#include "usplit/problems/grid.hpp"
#include "usplit/problems/spectral.hpp"
#include "usplit/splitting/split_system.hpp"

namespace usplit {

/// Scalar Helmholtz problem (nabla^2 + k^2) E = -S on a periodic grid with an absorbing
/// layer of `absorber_width` cells appended on each side of every axis. Inside the layer
/// k^2 is continued from the nearest interior cell and Im k^2 ramps linearly to
/// `absorber_strength` at the outer edge.
struct HelmholtzSpec {
  std::vector<std::size_t> shape;
  std::vector<double> spacing;
  std::vector<complex> k2;
  std::vector<complex> source;
  std::size_t absorber_width = 16;
  double absorber_strength = 0.0;
  /// Smallest circle with a free (complex) centre; false restricts the centre to the real axis.
  bool complex_bias = true;
};

inline void validate(const HelmholtzSpec& s) {
  const auto n = grid_size(s.shape);
  if (s.k2.size() != n || s.source.size() != n) throw InvalidArgument("helmholtz: field sizes do not match grid");
  for (auto k : s.k2) {
    if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) throw InvalidArgument("helmholtz: non-finite k^2");
    if (k.imag() < 0.0) throw InvalidArgument("helmholtz: Im k^2 must be non-negative (gain-free medium)");
  }
  if (!(s.absorber_strength >= 0.0)) throw InvalidArgument("helmholtz: absorber strength must be non-negative");
}

/// Canonical split of the padded problem: L = (-|p|^2 + kb2) / c with kb2 the smallest-circle
/// bias, V = (k^2 - kb2) / c, b = -S / c, and c = i * radius / target_norm.
inline SplitSystem build_helmholtz_split(const HelmholtzSpec& spec, double target_norm = kDefaultTargetNorm,
                                         double alpha = kDefaultAlpha) {
  validate(spec);
  const auto grid = make_padded_grid(spec.shape, spec.spacing, spec.absorber_width);
  auto k2 = grid.extend(spec.k2);
  for (std::size_t i = 0; i < k2.size(); ++i) k2[i] += complex(0.0, spec.absorber_strength * grid.depth[i]);

  const Circle circ = spec.complex_bias ? smallest_enclosing_circle(k2) : smallest_enclosing_circle_real_center(k2);
  const complex kb2 = circ.center;
  const double floor = std::abs(kb2) > 0.0 ? std::abs(kb2) : 1.0;
  ScaleRecord rec = compute_scalar_scale(circ, target_norm, complex(0.0, 1.0), floor);
  const complex c = *rec.scalar;

  FftPlan plan(grid.shape);
  const auto p2 = squared_wavenumbers(grid.shape, grid.spacing);
  std::vector<complex> l_sym(p2.size());
  for (std::size_t i = 0; i < p2.size(); ++i) l_sym[i] = (-p2[i] + kb2) / c;
  auto shifted = [plan, l_sym](complex s) {
    std::vector<complex> sym(l_sym.size());
    for (std::size_t i = 0; i < sym.size(); ++i) {
      const complex d = l_sym[i] + s;
      if (d == complex{}) throw SingularOperator("helmholtz: L + s is singular");
      sym[i] = 1.0 / d;
    }
    return fourier_multiplier(plan, std::move(sym));
  };

  std::vector<complex> v(k2.size());
  double vmax = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = (k2[i] - kb2) / c;
    vmax = std::max(vmax, std::abs(v[i]));
  }
  auto b = grid.embed(spec.source);
  for (auto& x : b) x = -x / c;

  auto split = make_split_system(fourier_multiplier(plan, l_sym), shifted, diagonal_map(std::move(v)),
                                 ComplexVector(std::move(b), grid.shape, grid.spacing), rec, vmax);
  split.alpha = alpha;
  split.bias = kb2;
  split.recover = [grid](const ComplexVector& x) {
    return ComplexVector(grid.crop(x.span()), grid.inner_shape, grid.spacing);
  };
  return split;
}

}  // namespace usplit
