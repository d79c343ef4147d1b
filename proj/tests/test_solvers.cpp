#include <gtest/gtest.h>

#include "usplit/solvers/shift_split.hpp"

using namespace usplit;

namespace {

DenseMatrix random_dense(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  DenseMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = complex(g(rng), g(rng));
  return m;
}

struct DenseProblem {
  DenseMatrix A, V;
  ComplexVector b;
};

DenseProblem accretive_problem(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DenseMatrix g = random_dense(n, rng);
  DenseMatrix v = random_dense(n, rng);
  v *= 0.95 / Eigen::JacobiSVD<DenseMatrix>(v).singularValues()(0);
  DenseMatrix l = g - g.adjoint();
  const double lo = hermitian_min_eigenvalue(l + v);
  l += (-lo + 0.2) * DenseMatrix::Identity(n, n);
  return {l + v, v, random_vector(static_cast<std::size_t>(n), rng)};
}

Eigen::VectorXcd as_eigen(const ComplexVector& x) {
  return Eigen::Map<const Eigen::VectorXcd>(x.data().data(), static_cast<Eigen::Index>(x.size()));
}

double relative_error(const ComplexVector& x, const Eigen::VectorXcd& ref) {
  return (as_eigen(x) - ref).norm() / ref.norm();
}

SolverConfig config(double tol, std::optional<std::size_t> restart = std::nullopt) {
  SolverConfig c;
  c.tol = tol;
  c.restart = restart;
  return c;
}

}  // namespace

TEST(Classifier, Converged) {
  EXPECT_EQ(classify_termination({1, 0.5, 1e-4}, SolverConfig{}), Status::converged);
}

TEST(Classifier, Diverged) {
  EXPECT_EQ(classify_termination({1, 10, 1e7}, SolverConfig{}), Status::diverged);
  EXPECT_EQ(classify_termination({1, std::nan("")}, SolverConfig{}), Status::diverged);
}

TEST(Classifier, GeometricStagnation) {
  std::vector<double> h(200);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::pow(0.99999, static_cast<double>(i));
  EXPECT_EQ(classify_termination(h, SolverConfig{}), Status::stagnated);
}

TEST(Classifier, FlatHistoryStagnates) {
  std::vector<double> h(120, 0.5);
  h[0] = 1.0;
  EXPECT_EQ(classify_termination(h, SolverConfig{}), Status::stagnated);
}

TEST(Classifier, BudgetOutcomes) {
  SolverConfig c;
  c.max_iter = 3;
  EXPECT_EQ(classify_termination({1, 0.9, 0.8, 0.7}, c), Status::max_iter);
  EXPECT_EQ(classify_termination({1, 2, 3, 4}, c), Status::diverged);
}

TEST(FixedPoint, ScalarHalvesEachIteration) {
  DenseMatrix one = DenseMatrix::Identity(1, 1);
  auto split = dense_split_system(one, DenseMatrix::Zero(1, 1), ComplexVector(std::vector<complex>{1.0}), 1.0);
  auto [x, rep] = fixed_point_solve(build_preconditioned(split), config(1e-10));
  EXPECT_EQ(rep.status, Status::converged);
  for (std::size_t k = 0; k < rep.residual_history.size(); ++k)
    EXPECT_NEAR(rep.residual_history[k], std::pow(0.5, static_cast<double>(k)), 1e-15);
  EXPECT_NEAR(std::abs(x[0] - 1.0), 0.0, 1e-9);
  EXPECT_EQ(rep.residual_history.size(), rep.iterations + 1);
}

TEST(FixedPoint, DenseAccretiveMatchesDirectSolve) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto p = accretive_problem(8, seed);
    auto split = dense_split_system(p.A, p.V, p.b, 0.75);
    auto pre = build_preconditioned(split);
    split.inv_L_plus_I.reset_evals();
    split.B.reset_evals();
    auto [x, rep] = fixed_point_solve(pre, config(1e-10));
    ASSERT_EQ(rep.status, Status::converged);
    EXPECT_LT(relative_error(x, p.A.partialPivLu().solve(as_eigen(p.b))), 1e-6);
    for (std::size_t k = 1; k < rep.residual_history.size(); ++k)
      EXPECT_LE(rep.residual_history[k], rep.residual_history[k - 1] + 1e-12);
    // One (L+1)^{-1} and two B per evaluation; the closing raw residual adds one B.
    EXPECT_EQ(split.inv_L_plus_I.evals(), rep.operator_evals);
    EXPECT_EQ(split.B.evals(), 2 * rep.operator_evals + 1);
    EXPECT_EQ(rep.operator_evals, rep.iterations + 1);
    EXPECT_LT(*rep.raw_residual, 1e-8);
  }
}

TEST(FixedPoint, RejectsBadStart) {
  auto p = accretive_problem(4, 1);
  auto pre = build_preconditioned(dense_split_system(p.A, p.V, p.b));
  EXPECT_THROW(fixed_point_solve(pre, SolverConfig{}, ComplexVector(3)), InvalidArgument);
}

TEST(Richardson, DivergesOnNonContractiveOperator) {
  auto A = diagonal_map({1.0, 5.0});
  ComplexVector b(std::vector<complex>{1.0, 1.0});
  auto [x, rep] = richardson_solve(A, b, SolverConfig{});
  EXPECT_EQ(rep.status, Status::diverged);
}

TEST(Gmres, IdentityInOneIteration) {
  ComplexVector b(std::vector<complex>{1.0, complex(0, 2), -3.0});
  auto [x, rep] = gmres_solve(identity_map(3), b, config(1e-10, 20));
  EXPECT_EQ(rep.status, Status::converged);
  EXPECT_EQ(rep.iterations, 1u);
  EXPECT_EQ(rep.operator_evals, 1u);
}

TEST(Gmres, DenseMatchesDirectSolve) {
  std::mt19937_64 rng(3);
  DenseMatrix a = random_dense(16, rng) + 8.0 * DenseMatrix::Identity(16, 16);
  auto b = random_vector(16, rng);
  const Eigen::VectorXcd ref = a.partialPivLu().solve(as_eigen(b));
  for (std::size_t m : {20u, 5u}) {
    auto op = DenseOperator(a).to_map();
    auto [x, rep] = gmres_solve(op, b, config(1e-3, m));
    EXPECT_EQ(rep.status, Status::converged);
    EXPECT_LT(relative_error(x, ref), 1e-3 * 20);
    EXPECT_EQ(op.evals(), rep.operator_evals);
    EXPECT_EQ(rep.residual_history.size(), rep.iterations + 1);
  }
}

TEST(Gmres, RestartRecomputesTrueResidual) {
  std::mt19937_64 rng(4);
  DenseMatrix a = random_dense(30, rng) + 14.0 * DenseMatrix::Identity(30, 30);
  auto b = random_vector(30, rng);
  auto op = DenseOperator(a).to_map();
  auto [x, rep] = gmres_solve(op, b, config(1e-12, 5));
  ASSERT_EQ(rep.status, Status::converged);
  Eigen::VectorXcd r = a * as_eigen(x) - as_eigen(b);
  EXPECT_LT(r.norm() / as_eigen(b).norm(), 1e-11);
  // Each full cycle of 5 steps adds one explicit residual evaluation.
  EXPECT_EQ(rep.operator_evals, rep.iterations + rep.iterations / 5 - (rep.iterations % 5 == 0 ? 1 : 0));
}

TEST(Bicgstab, IdentityInOneIteration) {
  ComplexVector b(std::vector<complex>{1.0, 2.0});
  auto [x, rep] = bicgstab_solve(identity_map(2), b, config(1e-10));
  EXPECT_EQ(rep.status, Status::converged);
  EXPECT_EQ(rep.iterations, 1u);
}

TEST(Bicgstab, DenseMatchesDirectSolve) {
  std::mt19937_64 rng(5);
  DenseMatrix a = random_dense(16, rng) + 8.0 * DenseMatrix::Identity(16, 16);
  auto b = random_vector(16, rng);
  auto op = DenseOperator(a).to_map();
  auto [x, rep] = bicgstab_solve(op, b, config(1e-8));
  EXPECT_EQ(rep.status, Status::converged);
  EXPECT_LT(relative_error(x, a.partialPivLu().solve(as_eigen(b))), 1e-6);
  EXPECT_EQ(op.evals(), rep.operator_evals);
  EXPECT_LE(rep.operator_evals, 2 * rep.iterations);
}

TEST(Solvers, AgreeOnPreconditionedSystem) {
  auto p = accretive_problem(12, 9);
  auto split = dense_split_system(p.A, p.V, p.b, 0.75);
  auto pre = build_preconditioned(split);
  const double tol = 1e-6;
  auto [xf, rf] = fixed_point_solve(pre, config(tol));
  auto [xg, rg] = gmres_solve(pre.precond_op, pre.precond_source, config(tol, 20));
  auto [xb, rb] = bicgstab_solve(pre.precond_op, pre.precond_source, config(tol));
  ASSERT_EQ(rf.status, Status::converged);
  ASSERT_EQ(rg.status, Status::converged);
  ASSERT_EQ(rb.status, Status::converged);
  auto ref = as_eigen(xg);
  EXPECT_LT(relative_error(xf, ref), 10 * tol);
  EXPECT_LT(relative_error(xb, ref), 10 * tol);
}

TEST(ShiftSplit, ShiftEqualToOperatorConvergesInOneStep) {
  const double gamma = 2.0;
  DenseMatrix a = gamma * DenseMatrix::Identity(4, 4);
  ComplexVector b(std::vector<complex>{1.0, 2.0, 3.0, 4.0});
  auto split = dense_split_system(a, DenseMatrix::Zero(4, 4), b);
  auto inner = build_preconditioned(shifted_split(split, gamma));
  ShiftConfig sc;
  sc.gamma = gamma;
  auto [x, rep] = shift_split_solve(split.forward(), b, sc, Algorithm::gmres, config(1e-3, 20), inner);
  EXPECT_EQ(rep.status, Status::converged);
  EXPECT_EQ(*rep.outer_iterations, 1u);
  EXPECT_NEAR(std::abs(x[1] - 1.0), 0.0, 1e-3);
}

TEST(ShiftSplit, DenseStrictlyAccretiveMatchesDirectSolve) {
  auto p = accretive_problem(8, 12);
  auto split = dense_split_system(p.A, p.V, p.b);
  auto inner = build_preconditioned(shifted_split(split, 1.0));
  ShiftConfig sc;
  sc.inner.tol = 1e-10;
  for (auto alg : {Algorithm::gmres, Algorithm::bicgstab}) {
    auto [x, rep] = shift_split_solve(split.forward(), p.b, sc, alg, config(1e-8, 20), inner);
    ASSERT_EQ(rep.status, Status::converged);
    EXPECT_LT(relative_error(x, p.A.partialPivLu().solve(as_eigen(p.b))), 1e-6);
    EXPECT_GE(rep.operator_evals, *rep.outer_iterations);
    EXPECT_EQ(rep.operator_evals, *rep.inner_evals + (rep.operator_evals - *rep.inner_evals));
    EXPECT_GT(*rep.inner_evals, *rep.outer_iterations);
  }
}

TEST(ShiftSplit, InnerFailureIsInherited) {
  auto p = accretive_problem(6, 2);
  auto split = dense_split_system(p.A, p.V, p.b);
  auto inner = build_preconditioned(shifted_split(split, 1.0));
  ShiftConfig sc;
  sc.inner.tol = 1e-14;
  sc.inner.max_iter = 2;
  sc.inner_algorithm = Algorithm::fixed_point;
  auto [x, rep] = shift_split_solve(split.forward(), p.b, sc, Algorithm::gmres, config(1e-3, 20), inner);
  EXPECT_NE(rep.status, Status::converged);
  EXPECT_FALSE(rep.message.empty());
}

TEST(ShiftSplit, RejectsNonAccretiveOperator) {
  DenseMatrix a = -DenseMatrix::Identity(2, 2);
  auto split = dense_split_system(DenseMatrix::Identity(2, 2), DenseMatrix::Zero(2, 2), ComplexVector(2));
  auto inner = build_preconditioned(shifted_split(split, 1.0));
  EXPECT_THROW(shift_split_solve(DenseOperator(a).to_map(), ComplexVector(std::vector<complex>{1.0, 1.0}),
                                 ShiftConfig{}, Algorithm::gmres, config(1e-3, 20), inner),
               InvalidArgument);
}
