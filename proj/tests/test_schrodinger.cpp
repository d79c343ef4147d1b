#include <gtest/gtest.h>

#include <numbers>

#include "usplit/problems/condition.hpp"

using namespace usplit;

namespace {

LinearMap dense_inverse_map(const DenseMatrix& m) {
  const DenseMatrix inv = m.inverse();
  return DenseOperator{inv}.to_map();
}

DenseMatrix random_spd(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  DenseMatrix x(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) x(i, j) = complex(g(rng), g(rng));
  return (x.adjoint() * x + 0.5 * static_cast<double>(n) * DenseMatrix::Identity(n, n)).eval();
}

double dense_eigen_ratio(const DenseMatrix& m) { return hermitian_max_eigenvalue(m) / hermitian_min_eigenvalue(m); }

SchrodingerSpec well_1d(std::size_t n, double shift) {
  SchrodingerSpec s;
  s.shape = {n};
  s.spacing = {0.25};
  s.potential.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (static_cast<double>(i) - 0.5 * n) * 0.25;
    s.potential[i] = std::min(0.5 * x * x, 6.0);
  }
  s.shift = shift;
  return s;
}

}  // namespace

TEST(Condition, IdentityIsOne) {
  for (std::size_t n : {10u, 200u}) {
    const auto id = identity_map(n);
    EXPECT_NEAR(estimate_condition_number(id, id).kappa, 1.0, 1e-9) << n;
  }
}

TEST(Condition, DiagonalRatio) {
  std::vector<complex> d(10);
  for (std::size_t i = 0; i < 10; ++i) d[i] = static_cast<double>(i + 1);
  std::vector<complex> inv(10);
  for (std::size_t i = 0; i < 10; ++i) inv[i] = 1.0 / d[i];
  EXPECT_NEAR(estimate_condition_number(diagonal_map(d), diagonal_map(inv)).kappa, 10.0, 1e-9);
}

TEST(Condition, DenseSpdMatchesEigenRatio) {
  const DenseMatrix m = random_spd(32, 3);
  const auto est = estimate_condition_number(DenseOperator{m}.to_map(), dense_inverse_map(m));
  EXPECT_TRUE(est.exact);
  EXPECT_NEAR(est.kappa / dense_eigen_ratio(m), 1.0, 0.01);
}

TEST(Condition, IterativePathMatchesEigenRatio) {
  const DenseMatrix m = random_spd(120, 5);
  const auto est = estimate_condition_number(DenseOperator{m}.to_map(), dense_inverse_map(m));
  EXPECT_FALSE(est.exact);
  EXPECT_NEAR(est.kappa / dense_eigen_ratio(m), 1.0, 0.01);
}

TEST(Condition, SolverRealizedInverse) {
  const DenseMatrix m = random_spd(80, 8);
  SolverConfig cfg;
  cfg.tol = 1e-12;
  cfg.max_iter = 5000;
  const auto est = estimate_condition_number(DenseOperator{m}.to_map(), Algorithm::gmres, cfg);
  EXPECT_NEAR(est.kappa / dense_eigen_ratio(m), 1.0, 0.01);
}

TEST(Schrodinger, FreeParticlePlaneWaves) {
  SchrodingerSpec s;
  s.shape = {32};
  s.spacing = {0.5};
  s.potential.assign(32, 0.0);
  s.shift = 0.0;
  const auto split = build_schrodinger_split(s);
  EXPECT_TRUE(split.scale.degenerate);
  const auto a = split.forward();
  const double c = split.scale.scalar->real();
  const double p = 2.0 * std::numbers::pi * 5.0 / (32 * 0.5);
  ComplexVector wave(32);
  for (std::size_t i = 0; i < 32; ++i) wave[i] = std::exp(complex(0.0, p * 0.5 * i));
  auto expected = wave;
  expected *= (0.5 * p * p) / c;
  EXPECT_LT(norm(a(wave) - expected), 1e-12 * norm(expected));
}

TEST(Schrodinger, BoundedWellMeetsConditionBound) {
  for (double shift : {0.0, 2.0}) {
    const auto split0 = build_schrodinger_split(well_1d(48, shift));
    const DenseMatrix a = realize(split0.forward()).entries;
    const double S = split0.certified_V_norm / hermitian_min_eigenvalue(a);
    const auto bound = condition_number_bound(S);
    const auto split = build_schrodinger_split(well_1d(48, shift), bound.v_opt);
    const auto pre = build_preconditioned(split);
    const double kappa = realize(pre.precond_op).condition_number();
    EXPECT_LE(kappa, bound.kappa_bound * (1 + 1e-9)) << shift;
    EXPECT_LT(kappa, dense_eigen_ratio(a)) << shift;
  }
}

TEST(Schrodinger, OperatorsAreConsistent) {
  const auto split = build_schrodinger_split(well_1d(64, 1.0));
  std::mt19937_64 rng(4);
  const auto x = random_vector(split.dim(), rng);
  EXPECT_LT(norm(split.L_plus_I()(split.inv_L_plus_I(x)) - x), 1e-12 * norm(x));
  EXPECT_GT(accretivity_lower_bound(split.forward(), 100, 3), 0.0);
  EXPECT_NEAR(split.bias->real(), 4.0, 1e-12);
}

TEST(Schrodinger, UnboundedPotentialRejected) {
  auto s = well_1d(16, 0.0);
  s.potential[3] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(build_schrodinger_split(s), InvalidArgument);
}

TEST(Schrodinger, DoubleRingStudyAtReducedGrid) {
  const auto study = schrodinger_condition_study(double_ring_spec(64, 6.4));
  EXPECT_GT(study.improvement, 10.0);
  EXPECT_LE(study.preconditioned.kappa, study.kappa_bound * 1.05);
}
