#include <gtest/gtest.h>

#include "usplit/core/dense.hpp"
#include "usplit/core/estimates.hpp"
#include "usplit/problems/pantograph.hpp"
#include "usplit/solvers/fixed_point.hpp"

using namespace usplit;

namespace {

PantographSpec decay_spec(double a0) {
  PantographSpec s;
  s.lambda = 0.5;
  s.t0 = 1.0;
  s.t_end = 3.0;
  s.dt = 0.01;
  s.a = [a0](double) { return complex(a0); };
  s.b = [](double) { return complex{}; };
  s.x0 = [](double) { return complex(1.0); };
  return s;
}

std::pair<ComplexVector, SolverReport> solve(const SplitSystem& split, double tol) {
  SolverConfig cfg;
  cfg.tol = tol;
  cfg.max_iter = 30000;
  return fixed_point_solve(build_preconditioned(split), cfg);
}

DenseMatrix to_dense(const SparseMatrix& m) { return DenseMatrix(m); }

}  // namespace

TEST(Pantograph, WithoutDelayIsExponentialDecay) {
  for (double a0 : {2.0, 5.0}) {
    const auto spec = decay_spec(a0);
    const auto split = build_pantograph_split(spec);
    const auto [x, rep] = solve(split, 1e-10);
    ASSERT_EQ(rep.status, Status::converged);
    const auto u = split.physical(x);
    ASSERT_EQ(u.size(), 201u);
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double t = spec.t0 + j * spec.dt;
      const double exact = std::exp(-a0 * (t - spec.t0));
      EXPECT_LT(std::abs(u[j] - exact), 0.01 * exact) << "t=" << t;
    }
  }
}

TEST(Pantograph, UnitDilationIsIdentity) {
  auto spec = decay_spec(1.0);
  spec.lambda = 1.0;
  const auto d = discretize_pantograph(spec);
  const DenseMatrix dil = to_dense(d.dilation);
  EXPECT_LT((dil - DenseMatrix::Identity(dil.rows(), dil.cols())).norm(), 1e-14);
}

TEST(Pantograph, DerivativeIsSkewAwayFromEnds) {
  const auto d = discretize_pantograph(decay_spec(1.0));
  const DenseMatrix dm = to_dense(d.derivative);
  DenseMatrix herm = 0.5 * (dm + dm.adjoint());
  const auto n = herm.rows();
  EXPECT_NEAR(herm(0, 0).real(), 1.0 / 0.01, 1e-9);
  EXPECT_NEAR(herm(n - 1, n - 1).real(), 1.0 / 0.01, 1e-9);
  herm(0, 0) = herm(n - 1, n - 1) = 0.0;
  EXPECT_LT(herm.norm(), 1e-12 * dm.norm());
}

TEST(Pantograph, DilationBoundDominatesNorm) {
  for (double lambda : {0.3, 0.5, 0.9}) {
    auto spec = decay_spec(1.0);
    spec.lambda = lambda;
    spec.t0 = 0.1;
    spec.dt = 0.05;
    const auto d = discretize_pantograph(spec);
    const double exact = Eigen::JacobiSVD<DenseMatrix>(to_dense(d.dilation)).singularValues()(0);
    EXPECT_LE(exact, d.dilation_bound + 1e-12);
    EXPECT_GT(exact, 1.0);
  }
}

TEST(Pantograph, FutureValuesBeyondGridRejected) {
  auto spec = decay_spec(1.0);
  spec.lambda = 1.5;
  spec.b = [](double) { return complex(0.5); };
  EXPECT_THROW(build_pantograph_split(spec), InvalidArgument);
}

TEST(Pantograph, CertifiedPotentialBound) {
  const auto split = build_pantograph_split(inhomogeneous_pantograph(-5.0, 4.0, 0.02));
  EXPECT_LE(split.certified_V_norm, kDefaultTargetNorm + 1e-12);
  EXPECT_LE(operator_norm_estimate(split.V()).value, split.certified_V_norm + 1e-9);
  std::mt19937_64 rng(2);
  const auto x = random_vector(split.dim(), rng);
  EXPECT_LT(norm(split.L_plus_I()(split.inv_L_plus_I(x)) - x), 1e-12 * norm(x));
}

TEST(Pantograph, DecaysExponentiallyWhereDelayVanishes) {
  for (double b0 : {5.0, -5.0}) {
    const auto spec = inhomogeneous_pantograph(b0);
    const auto split = build_pantograph_split(spec);
    const auto [x, rep] = solve(split, 1e-10);
    ASSERT_EQ(rep.status, Status::converged);
    const auto u = split.physical(x);
    // Least-squares slope of log|u| on [3.1, 4.1].
    double st = 0, sy = 0, stt = 0, sty = 0;
    int m = 0;
    for (std::size_t j = 210; j <= 310; ++j, ++m) {
      const double t = spec.t0 + j * spec.dt, y = std::log(std::abs(u[j]));
      st += t;
      sy += y;
      stt += t * t;
      sty += t * y;
    }
    const double slope = (m * sty - st * sy) / (m * stt - st * st);
    EXPECT_NEAR(slope, -5.0, 0.1) << "b0=" << b0;
  }
}

TEST(Pantograph, NonAccretiveCaseDetectedAndAntisymmetrizedIsSkew) {
  const auto spec = non_accretive_pantograph(3.0, 0.02);
  const auto plain = build_pantograph_split(spec, kDefaultTargetNorm, false);
  EXPECT_LT(accretivity_lower_bound(plain.forward(), 200, 4), 0.0);
  const auto anti = build_pantograph_split(spec, kDefaultTargetNorm, true);
  EXPECT_EQ(anti.dim(), 2 * plain.dim());
  EXPECT_GE(accretivity_lower_bound(anti.forward(), 200, 4), -1e-12);
  std::mt19937_64 rng(6);
  const auto x = random_vector(anti.dim(), rng);
  EXPECT_LT(norm(anti.L_plus_I()(anti.inv_L_plus_I(x)) - x), 1e-9 * norm(x));
}

TEST(Pantograph, AntisymmetrizedSolvesShortInterval) {
  const auto spec = non_accretive_pantograph(1.5, 0.01);
  const auto anti = build_pantograph_split(spec, kDefaultTargetNorm, true);
  const auto plain = build_pantograph_split(spec, kDefaultTargetNorm, false);
  const auto [xa, ra] = solve(anti, 1e-8);
  const auto [xp, rp] = solve(plain, 1e-8);
  ASSERT_EQ(ra.status, Status::converged);
  ASSERT_EQ(rp.status, Status::converged);
  const auto ua = anti.physical(xa), up = plain.physical(xp);
  EXPECT_LT(norm(ua - up), 1e-5 * norm(up));
}
