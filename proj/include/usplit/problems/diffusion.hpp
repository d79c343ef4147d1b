#pragma once

#include <Eigen/Dense>

#include "usplit/problems/grid.hpp"
#include "usplit/problems/spectral.hpp"
#include "usplit/splitting/split_system.hpp"

namespace usplit {

/// Stationary diffusion: div F + a u = S with F = -D grad u, on a periodic d-dimensional grid.
/// `D` holds one row-major d x d tensor per grid point.
struct DiffusionSpec {
  std::vector<std::size_t> shape;
  std::vector<double> spacing;
  std::vector<complex> D;
  std::vector<complex> a;
  std::vector<complex> source;
  std::size_t absorber_width = 0;
  /// Absorption added at the outer edge of the padding; ramps linearly from zero.
  double absorber_strength = 0.0;
};

namespace detail {

using SmallMatrix = Eigen::MatrixXcd;

inline SmallMatrix tensor_at(const DiffusionSpec& s, std::size_t point, std::size_t d) {
  SmallMatrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.D[(point * d + i) * d + j];
  return m;
}

}  // namespace detail

/// Canonical split in the variables x = Sigma^{1/2} [u; F], stored component-major with
/// shape {d+1, grid...}. W(r) = blockdiag(a, D^{-1}) is split per entry into the smallest-circle
/// centre C and a residual whose radii are equilibrated into Sigma; then
/// L = Sigma^{-1/2} (G + C) Sigma^{-1/2} / c and V = Sigma^{-1/2} (W - C) Sigma^{-1/2} / c with
/// G the skew-Hermitian gradient/divergence block and c = max_r ||V_raw(r)|| / target_norm.
inline SplitSystem build_diffusion_split(const DiffusionSpec& spec, double target_norm = kDefaultTargetNorm,
                                         double alpha = kDefaultAlpha) {
  using detail::SmallMatrix;
  const std::size_t d = spec.shape.size();
  const std::size_t m = d + 1;
  const auto mi = static_cast<Eigen::Index>(m);
  const std::size_t n_inner = grid_size(spec.shape);
  if (spec.D.size() != n_inner * d * d || spec.a.size() != n_inner || spec.source.size() != n_inner)
    throw InvalidArgument("diffusion: field sizes do not match grid");

  const auto grid = make_padded_grid(spec.shape, spec.spacing, spec.absorber_width);
  const std::size_t n = grid.size();

  // Pointwise W(r) on the inner grid, validated once.
  std::vector<SmallMatrix> w_inner(n_inner);
  for (std::size_t r = 0; r < n_inner; ++r) {
    const complex ar = spec.a[r];
    if (!std::isfinite(ar.real()) || !std::isfinite(ar.imag()) || ar.real() < 0.0)
      throw InvalidArgument("diffusion: absorption must be finite with non-negative real part");
    const SmallMatrix dt = detail::tensor_at(spec, r, d);
    if (!dt.allFinite()) throw InvalidArgument("diffusion: non-finite diffusion tensor");
    Eigen::SelfAdjointEigenSolver<SmallMatrix> es(0.5 * (dt + dt.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12 * dt.norm())
      throw InvalidArgument("diffusion: diffusion tensor is not accretive");
    Eigen::FullPivLU<SmallMatrix> lu(dt);
    if (!lu.isInvertible()) throw InvalidArgument("diffusion: diffusion tensor is singular");
    SmallMatrix w = SmallMatrix::Zero(mi, mi);
    w(0, 0) = ar;
    w.bottomRightCorner(mi - 1, mi - 1) = lu.inverse();
    w_inner[r] = std::move(w);
  }
  auto w_at = [&](std::size_t p) {
    SmallMatrix w = w_inner[grid.nearest[p]];
    w(0, 0) += spec.absorber_strength * grid.depth[p];
    return w;
  };

  // Per-entry smallest circles.
  SmallMatrix centre(mi, mi);
  Eigen::MatrixXd radius(mi, mi);
  {
    std::vector<complex> vals(n);
    for (Eigen::Index i = 0; i < mi; ++i)
      for (Eigen::Index j = 0; j < mi; ++j) {
        for (std::size_t p = 0; p < n; ++p) vals[p] = w_at(p)(i, j);
        const auto circ = smallest_enclosing_circle(vals);
        centre(i, j) = circ.center;
        radius(i, j) = circ.radius;
      }
  }
  const auto eq = equilibrate(radius);
  Eigen::VectorXd half(mi);
  for (Eigen::Index i = 0; i < mi; ++i) half(i) = 1.0 / std::sqrt(eq.sigma[static_cast<std::size_t>(i)]);

  // Scaled residual per point and the overall scale.
  std::vector<SmallMatrix> v(n);
  double vmax = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    v[p] = half.asDiagonal() * (w_at(p) - centre) * half.asDiagonal();
    vmax = std::max(vmax, Eigen::JacobiSVD<SmallMatrix>(v[p]).singularValues()(0));
  }
  const SmallMatrix c_scaled = half.asDiagonal() * centre * half.asDiagonal();
  const double floor = std::max(c_scaled.norm(), 1.0);
  ScaleRecord rec = compute_scalar_scale(Circle{0.0, vmax}, target_norm, 1.0, floor);
  const double c = rec.scalar->real();
  rec.diagonal = eq.sigma;
  double certified = 0.0;
  for (auto& vp : v) {
    vp /= c;
    certified = std::max(certified, Eigen::JacobiSVD<SmallMatrix>(vp).singularValues()(0));
  }

  // Per-mode symbol of L: Sigma^{-1/2} (G(p) + C) Sigma^{-1/2} / c.
  FftPlan plan(grid.shape);
  std::vector<std::vector<double>> axis_p(d);
  for (std::size_t ax = 0; ax < d; ++ax) axis_p[ax] = wavenumbers(grid.shape[ax], grid.spacing[ax]);
  auto symbol = std::make_shared<std::vector<SmallMatrix>>(n);
  {
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t q = 0; q < n; ++q) {
      SmallMatrix g = centre;
      for (std::size_t ax = 0; ax < d; ++ax) {
        const complex ip(0.0, axis_p[ax][idx[ax]]);
        const auto k = static_cast<Eigen::Index>(ax + 1);
        g(0, k) += ip;
        g(k, 0) += ip;
      }
      (*symbol)[q] = half.asDiagonal() * g * half.asDiagonal() / c;
      for (std::size_t ax = d; ax-- > 0;) {
        if (++idx[ax] < grid.shape[ax]) break;
        idx[ax] = 0;
      }
    }
  }

  // Applies a per-mode matrix field to a component-major vector.
  auto modal = [plan, n, m](std::shared_ptr<const std::vector<SmallMatrix>> mats, bool adjoint) {
    return [plan, n, m, mats, adjoint](std::span<const complex> in, std::span<complex> out) {
      std::vector<complex> buf(in.begin(), in.end());
      for (std::size_t k = 0; k < m; ++k) plan.forward(std::span<complex>(buf).subspan(k * n, n));
      Eigen::VectorXcd xin(static_cast<Eigen::Index>(m));
      for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t k = 0; k < m; ++k) xin(static_cast<Eigen::Index>(k)) = buf[k * n + q];
        const Eigen::VectorXcd y = adjoint ? Eigen::VectorXcd((*mats)[q].adjoint() * xin) : Eigen::VectorXcd((*mats)[q] * xin);
        for (std::size_t k = 0; k < m; ++k) out[k * n + q] = y(static_cast<Eigen::Index>(k));
      }
      for (std::size_t k = 0; k < m; ++k) plan.inverse(out.subspan(k * n, n));
    };
  };
  LinearMap L(m * n, modal(symbol, false), modal(symbol, true));
  auto shifted = [symbol, modal, m, n](complex s) {
    auto inv = std::make_shared<std::vector<SmallMatrix>>(n);
    const SmallMatrix id = SmallMatrix::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t q = 0; q < n; ++q) {
      Eigen::FullPivLU<SmallMatrix> lu((*symbol)[q] + s * id);
      if (!lu.isInvertible()) throw SingularOperator("diffusion: L + s is singular");
      (*inv)[q] = lu.inverse();
    }
    return LinearMap(m * n, modal(inv, false), modal(inv, true));
  };

  auto vfield = std::make_shared<const std::vector<SmallMatrix>>(std::move(v));
  auto pointwise = [vfield, n, m](bool adjoint) {
    return [vfield, n, m, adjoint](std::span<const complex> in, std::span<complex> out) {
      for (std::size_t p = 0; p < n; ++p) {
        const auto& vp = (*vfield)[p];
        for (std::size_t i = 0; i < m; ++i) {
          complex acc{};
          for (std::size_t k = 0; k < m; ++k) {
            const auto ii = static_cast<Eigen::Index>(i), kk = static_cast<Eigen::Index>(k);
            acc += (adjoint ? std::conj(vp(kk, ii)) : vp(ii, kk)) * in[k * n + p];
          }
          out[i * n + p] = acc;
        }
      }
    };
  };
  LinearMap V(m * n, pointwise(false), pointwise(true));

  std::vector<complex> b(m * n);
  const auto s_pad = grid.embed(spec.source);
  for (std::size_t p = 0; p < n; ++p) b[p] = half(0) * s_pad[p] / c;
  std::vector<std::size_t> shape{m};
  shape.insert(shape.end(), grid.shape.begin(), grid.shape.end());

  auto split = make_split_system(L, shifted, V, ComplexVector(std::move(b), shape, grid.spacing), rec,
                                 certified);
  split.alpha = alpha;
  std::vector<std::size_t> out_shape{m};
  out_shape.insert(out_shape.end(), grid.inner_shape.begin(), grid.inner_shape.end());
  split.recover = [grid, half, m, n, out_shape](const ComplexVector& x) {
    const std::size_t ni = grid.inner_size();
    std::vector<complex> out(m * ni);
    for (std::size_t k = 0; k < m; ++k) {
      const auto part = grid.crop(x.span().subspan(k * n, n));
      for (std::size_t i = 0; i < ni; ++i) out[k * ni + i] = half(static_cast<Eigen::Index>(k)) * part[i];
    }
    return ComplexVector(std::move(out), out_shape, grid.spacing);
  };
  return split;
}

}  // namespace usplit
