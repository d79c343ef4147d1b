#include <gtest/gtest.h>

#include <numbers>

#include "usplit/core/estimates.hpp"
#include "usplit/problems/diffusion.hpp"
#include "usplit/problems/helmholtz.hpp"
#include "usplit/solvers/fixed_point.hpp"

using namespace usplit;

namespace {

HelmholtzSpec uniform_helmholtz(std::size_t n, double k, std::size_t width, double strength) {
  HelmholtzSpec s;
  s.shape = {n};
  s.spacing = {1.0};
  s.k2.assign(n, k * k);
  s.source.assign(n, 0.0);
  s.source[n / 2] = 1.0;
  s.absorber_width = width;
  s.absorber_strength = strength;
  return s;
}

double max_abs_diff(const ComplexVector& a, const ComplexVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Helmholtz, HomogeneousMediumHasZeroPotential) {
  const auto spec = uniform_helmholtz(64, 0.5, 0, 0.0);
  const auto split = build_helmholtz_split(spec);
  EXPECT_TRUE(split.scale.degenerate);
  std::mt19937_64 rng(3);
  const auto x = random_vector(split.dim(), rng);
  EXPECT_LT(norm(split.V()(x)), 1e-14 * norm(x));
  ASSERT_TRUE(split.bias.has_value());
  EXPECT_NEAR(std::abs(*split.bias - 0.25), 0.0, 1e-14);
}

TEST(Helmholtz, PlaneWaveIsEigenfunctionOfL) {
  const std::size_t n = 32;
  const auto spec = uniform_helmholtz(n, 0.7, 0, 0.0);
  const auto split = build_helmholtz_split(spec);
  const double p = 2.0 * std::numbers::pi * 3.0 / n;
  ComplexVector wave(n);
  for (std::size_t i = 0; i < n; ++i) wave[i] = std::exp(complex(0.0, p * i));
  const complex expected = (-p * p + *split.bias) / *split.scale.scalar;
  ComplexVector ref = wave;
  ref *= expected;
  EXPECT_LT(max_abs_diff(split.L(wave), ref), 1e-12);
}

TEST(Helmholtz, ShiftedInverseRoundTrip) {
  auto spec = uniform_helmholtz(48, 0.6, 8, 0.1);
  spec.k2[10] = complex(0.5, 0.2);
  const auto split = build_helmholtz_split(spec);
  std::mt19937_64 rng(5);
  const auto x = random_vector(split.dim(), rng);
  EXPECT_LT(norm(split.L_plus_I()(split.inv_L_plus_I(x)) - x), 1e-12 * norm(x));
}

TEST(Helmholtz, PotentialNormWithinTarget) {
  auto spec = uniform_helmholtz(40, 0.8, 6, 0.2);
  for (std::size_t i = 10; i < 20; ++i) spec.k2[i] = complex(1.5, 0.05 * i);
  const auto split = build_helmholtz_split(spec);
  EXPECT_LE(split.certified_V_norm, kDefaultTargetNorm + 1e-12);
  EXPECT_LE(operator_norm_estimate(split.V()).value, split.certified_V_norm + 1e-9);
}

TEST(Helmholtz, ForwardOperatorIsAccretive) {
  auto spec = uniform_helmholtz(40, 0.8, 6, 0.2);
  for (std::size_t i = 10; i < 20; ++i) spec.k2[i] = complex(1.5, 0.3);
  const auto split = build_helmholtz_split(spec);
  EXPECT_GE(accretivity_lower_bound(split.forward(), 200, 11), -1e-12);
}

TEST(Helmholtz, GainMediumRejected) {
  auto spec = uniform_helmholtz(16, 0.5, 0, 0.0);
  spec.k2[3] = complex(0.25, -0.1);
  EXPECT_THROW(build_helmholtz_split(spec), InvalidArgument);
}

TEST(Helmholtz, OneDimensionalGreenFunction) {
  // Outgoing solution of u'' + k^2 u = -delta is i exp(ik|x|) / (2k).
  const std::size_t n = 512;
  const double k = 2.0 * std::numbers::pi / 16.0;
  const auto spec = uniform_helmholtz(n, k, 128, 0.06);
  const auto split = build_helmholtz_split(spec, kDefaultTargetNorm, 1.0);
  const auto pre = build_preconditioned(split);
  SolverConfig cfg;
  cfg.tol = 1e-8;
  cfg.max_iter = 20000;
  const auto [x, rep] = fixed_point_solve(pre, cfg);
  ASSERT_EQ(rep.status, Status::converged);
  const auto u = split.physical(x);
  ASSERT_EQ(u.size(), n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::abs(static_cast<double>(i) - static_cast<double>(n / 2));
    const complex g = complex(0.0, 1.0) / (2.0 * k) * std::exp(complex(0.0, k * r));
    num += std::norm(u[i] - g);
    den += std::norm(g);
  }
  EXPECT_LT(std::sqrt(num / den), 0.01);
}

TEST(Helmholtz, RealCentreBiasIsReal) {
  auto spec = uniform_helmholtz(32, 0.5, 4, 0.3);
  spec.complex_bias = false;
  const auto split = build_helmholtz_split(spec);
  EXPECT_EQ(split.bias->imag(), 0.0);
}

namespace {

DiffusionSpec slab_spec(std::size_t n, std::size_t slab, double ze, std::size_t* src) {
  DiffusionSpec s;
  s.shape = {n};
  s.spacing = {1.0};
  s.D.assign(n, 1.0);
  s.a.assign(n, 0.0);
  s.source.assign(n, 0.0);
  const std::size_t z0 = (n - slab) / 2, z1 = z0 + slab;
  for (std::size_t i = 0; i < n; ++i)
    if (i < z0 || i >= z1) s.a[i] = 1.0 / (ze * ze);
  *src = z0 + slab / 3;
  s.source[*src] = 1.0;
  return s;
}

}  // namespace

TEST(Diffusion, SlabMatchesExtrapolatedBoundarySolution) {
  const std::size_t n = 256, slab = 100;
  const double ze = 5.0;
  std::size_t is = 0;
  const auto spec = slab_spec(n, slab, ze, &is);
  const auto split = build_diffusion_split(spec, kDefaultTargetNorm, 1.0);
  const auto pre = build_preconditioned(split);
  SolverConfig cfg;
  cfg.tol = 1e-9;
  cfg.max_iter = 20000;
  const auto [x, rep] = fixed_point_solve(pre, cfg);
  ASSERT_EQ(rep.status, Status::converged);
  const auto uf = split.physical(x);
  // Piecewise-linear solution vanishing ze beyond each slab face, with unit flux jump at the source.
  const std::size_t z0 = (n - slab) / 2, z1 = z0 + slab;
  const double zl = z0 - 0.5, zr = z1 - 0.5, zs = static_cast<double>(is);
  const double lf = zs - zl + ze, rf = zr + ze - zs;
  const double bcoef = 1.0 / (1.0 + rf / lf), acoef = bcoef * rf / lf;
  double num = 0.0, den = 0.0;
  for (std::size_t i = z0; i < z1; ++i) {
    const double z = static_cast<double>(i);
    const double ua = z < zs ? acoef * (z - zl + ze) : bcoef * (zr + ze - z);
    num += std::norm(uf[i] - ua);
    den += ua * ua;
  }
  EXPECT_LT(std::sqrt(num / den), 0.02);
}

TEST(Diffusion, UnknownsIncludeFlux) {
  DiffusionSpec s;
  s.shape = {8, 6};
  s.spacing = {1.0, 0.5};
  s.D.assign(48 * 4, 0.0);
  for (std::size_t p = 0; p < 48; ++p) s.D[4 * p] = s.D[4 * p + 3] = 2.0;
  s.a.assign(48, 0.1);
  s.source.assign(48, 0.0);
  const auto split = build_diffusion_split(s);
  EXPECT_EQ(split.dim(), 3u * 48u);
  EXPECT_EQ(split.physical(ComplexVector(split.dim())).size(), 3u * 48u);
}

TEST(Diffusion, OperatorsAreConsistent) {
  std::size_t is = 0;
  auto spec = slab_spec(64, 20, 3.0, &is);
  spec.D[30] = 4.0;
  spec.a[31] = complex(0.2, 0.5);
  const auto split = build_diffusion_split(spec);
  std::mt19937_64 rng(9);
  const auto x = random_vector(split.dim(), rng);
  EXPECT_LT(norm(split.L_plus_I()(split.inv_L_plus_I(x)) - x), 1e-11 * norm(x));
  EXPECT_LE(split.certified_V_norm, kDefaultTargetNorm + 1e-12);
  EXPECT_LE(operator_norm_estimate(split.V()).value, split.certified_V_norm + 1e-9);
  EXPECT_GE(accretivity_lower_bound(split.forward(), 200, 13), -1e-12);
  EXPECT_LT(adjoint_defect(split.L, 4, 1), 1e-12);
}

TEST(Diffusion, InvalidMaterialsRejected) {
  std::size_t is = 0;
  auto spec = slab_spec(16, 4, 3.0, &is);
  spec.D[2] = -1.0;
  EXPECT_THROW(build_diffusion_split(spec), InvalidArgument);
  spec.D[2] = 0.0;
  EXPECT_THROW(build_diffusion_split(spec), InvalidArgument);
  spec.D[2] = 1.0;
  spec.a[5] = -0.5;
  EXPECT_THROW(build_diffusion_split(spec), InvalidArgument);
}
