#pragma once

#include "usplit/analysis/bounds.hpp"
#include "usplit/core/dense.hpp"
#include "usplit/problems/schrodinger.hpp"
#include "usplit/solvers/shift_split.hpp"

namespace usplit {

struct ExtremeEigenvalue {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Largest eigenvalue of a Hermitian operator: Lanczos with full reorthogonalisation,
/// stopping when the top Ritz value changes by less than `tol` relative between checks.
inline ExtremeEigenvalue largest_eigenvalue(const LinearMap& op, std::size_t max_steps = 300, double tol = 1e-10,
                                            std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  const std::size_t n = op.dim();
  const std::size_t steps = std::min(max_steps, n);
  std::vector<ComplexVector> basis;
  basis.push_back(random_unit_vector(n, rng));
  std::vector<double> diag, off;
  ExtremeEigenvalue out;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < steps; ++k) {
    auto w = op(basis[k]);
    diag.push_back(dot(basis[k], w).real());
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) axpy(-dot(q, w), q.span(), w.span());
    const double beta = norm(w);
    if (!std::isfinite(beta)) throw SingularOperator("largest_eigenvalue: iteration broke down");

    const auto m = static_cast<Eigen::Index>(diag.size());
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(diag.data(), m);
    Eigen::VectorXd e = m > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(off.data(), m - 1))
                              : Eigen::VectorXd();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
    out.value = es.eigenvalues()(m - 1);
    out.iterations = k + 1;
    const bool exhausted = beta <= 1e-13 * std::abs(out.value);
    if (exhausted || std::abs(out.value - prev) <= tol * std::abs(out.value)) {
      out.converged = true;
      break;
    }
    prev = out.value;
    off.push_back(beta);
    w *= 1.0 / beta;
    basis.push_back(std::move(w));
  }
  return out;
}

struct ConditionEstimate {
  double kappa = 0.0;
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  std::size_t iterations = 0;
  bool exact = false;
};

/// kappa = lambda_max / lambda_min of a Hermitian positive definite operator, with
/// lambda_min = 1 / lambda_max(inverse). Operators up to the dense oracle cap are realised
/// and use singular values instead.
inline ConditionEstimate estimate_condition_number(const LinearMap& op, const LinearMap& inverse,
                                                   std::size_t max_iters = 300, double tol = 1e-10) {
  ConditionEstimate out;
  if (op.dim() <= kDenseOracleCap) {
    const auto s = realize(op).singular_values();
    out.lambda_max = s(0);
    out.lambda_min = s(s.size() - 1);
    out.kappa = out.lambda_min > 0.0 ? out.lambda_max / out.lambda_min : std::numeric_limits<double>::infinity();
    out.exact = true;
    return out;
  }
  const auto hi = largest_eigenvalue(op, max_iters, tol, 7);
  const auto lo = largest_eigenvalue(inverse, max_iters, tol, 11);
  out.lambda_max = hi.value;
  out.lambda_min = 1.0 / lo.value;
  out.kappa = hi.value * lo.value;
  out.iterations = hi.iterations + lo.iterations;
  return out;
}

/// Inverse realised by an iterative solve of a x = r; a non-converged solve throws.
inline LinearMap solver_inverse(const LinearMap& a, Algorithm solver, const SolverConfig& cfg,
                                const std::function<ComplexVector(const ComplexVector&)>& rhs_map = {}) {
  auto fwd = [a, solver, cfg, rhs_map](std::span<const complex> in, std::span<complex> out) {
    ComplexVector r(std::vector<complex>(in.begin(), in.end()));
    if (rhs_map) r = rhs_map(r);
    auto [x, rep] = solve_linear(solver, a, r, cfg);
    if (rep.status != Status::converged)
      throw InnerSolveFailure(rep.status, "solver_inverse: inner solve did not converge");
    std::copy(x.begin(), x.end(), out.begin());
  };
  return LinearMap(a.dim(), fwd);
}

inline ConditionEstimate estimate_condition_number(const LinearMap& op, Algorithm solver, const SolverConfig& cfg,
                                                   std::size_t max_iters = 300) {
  return estimate_condition_number(op, solver_inverse(op, solver, cfg), max_iters);
}

struct ConditionStudy {
  ConditionEstimate raw;
  ConditionEstimate preconditioned;
  double S = 0.0;
  double v_norm = 0.0;
  double kappa_bound = 0.0;
  double improvement = 0.0;
};

/// Condition numbers of the Schrodinger operator before and after preconditioning. The
/// preconditioned system is rescaled so that ||V|| = v_opt for the measured S.
inline ConditionStudy schrodinger_condition_study(const SchrodingerSpec& spec, Algorithm solver = Algorithm::bicgstab,
                                                  double solve_tol = 1e-11, double eig_tol = 1e-6) {
  SolverConfig cfg;
  cfg.tol = solve_tol;
  cfg.max_iter = 20000;

  ConditionStudy out;
  const auto split0 = build_schrodinger_split(spec);
  const auto pre0 = build_preconditioned(split0);
  // A^{-1} r through the preconditioned system Gamma^{-1} A x = Gamma^{-1} r.
  const auto a_inverse =
      solver_inverse(pre0.precond_op, solver, cfg, [split0](const ComplexVector& r) { return precondition_rhs(split0, r); });
  out.raw = estimate_condition_number(split0.forward(), a_inverse, 300, eig_tol);
  out.S = split0.certified_V_norm / out.raw.lambda_min;

  const auto bound = condition_number_bound(out.S);
  out.kappa_bound = bound.kappa_bound;
  const auto split1 = build_schrodinger_split(spec, bound.v_opt);
  out.v_norm = split1.certified_V_norm;
  const auto pre1 = build_preconditioned(split1);
  out.preconditioned = estimate_condition_number(pre1.precond_op, solver_inverse(pre1.precond_op, solver, cfg), 300,
                                                 eig_tol);
  out.improvement = out.raw.kappa / out.preconditioned.kappa;
  return out;
}

}  // namespace usplit
