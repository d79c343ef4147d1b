#pragma once

#include "usplit/solvers/config.hpp"
#include "usplit/splitting/split_system.hpp"

namespace usplit {

namespace detail {

inline void check_start(const std::optional<ComplexVector>& x0, std::size_t n) {
  if (x0 && x0->size() != n) throw InvalidArgument("solver: x0 dimension mismatch");
}

inline double relative_residual(const LinearMap& A, const ComplexVector& x, const ComplexVector& b) {
  auto r = A(x);
  r -= b;
  const double nb = norm(b);
  return nb > 0.0 ? norm(r) / nb : norm(r);
}

}  // namespace detail

/// ||A x - b|| / ||b|| for the canonical system held by a split.
inline double raw_relative_residual(const SplitSystem& split, const ComplexVector& x) {
  return detail::relative_residual(split.forward(), x, split.source);
}

/// Preconditioned fixed-point iteration x <- x + alpha * Delta with
/// Delta = B[(L+1)^{-1}(B x + b) - x]. The step size is split.alpha.
///
/// The monitored residual is ||Delta|| / ||B (L+1)^{-1} b||; one (L+1)^{-1} per evaluation.
inline std::pair<ComplexVector, SolverReport> fixed_point_solve(const PreconditionedSystem& pre,
                                                                 const SolverConfig& cfg,
                                                                 std::optional<ComplexVector> x0 = std::nullopt) {
  cfg.validate();
  const auto& split = pre.split;
  const std::size_t n = split.dim();
  detail::check_start(x0, n);
  detail::Stopwatch clock;

  ComplexVector x = x0 ? *x0 : ComplexVector::zeros_like(split.source);
  std::vector<complex> t(n), u(n), delta(n);
  const double ref = norm(pre.precond_source) / split.alpha;
  if (!(ref > 0.0)) throw InvalidArgument("fixed_point_solve: zero source");

  SolverReport rep;
  for (;;) {
    split.B.apply(x.span(), t);
    for (std::size_t i = 0; i < n; ++i) t[i] += split.source[i];
    split.inv_L_plus_I.apply(t, u);
    for (std::size_t i = 0; i < n; ++i) u[i] -= x[i];
    split.B.apply(u, delta);
    ++rep.operator_evals;
    rep.residual_history.push_back(norm(std::span<const complex>(delta)) / ref);
    if (auto s = detail::check_progress(rep.residual_history, cfg, rep.operator_evals)) {
      rep.status = *s;
      break;
    }
    axpy(split.alpha, delta, x.span());
  }
  rep.iterations = rep.residual_history.size() - 1;
  rep.raw_residual = raw_relative_residual(split, x);
  rep.wall_time = clock.seconds();
  return {std::move(x), std::move(rep)};
}

/// Richardson iteration x <- x + alpha (b - A x) on a generic operator.
inline std::pair<ComplexVector, SolverReport> richardson_solve(const LinearMap& A, const ComplexVector& b,
                                                                const SolverConfig& cfg,
                                                                std::optional<ComplexVector> x0 = std::nullopt) {
  cfg.validate();
  const std::size_t n = A.dim();
  if (b.size() != n) throw InvalidArgument("richardson_solve: rhs dimension mismatch");
  detail::check_start(x0, n);
  detail::Stopwatch clock;

  const double nb = norm(b);
  if (!(nb > 0.0)) throw InvalidArgument("richardson_solve: zero rhs");
  ComplexVector x = x0 ? *x0 : ComplexVector::zeros_like(b);
  std::vector<complex> r(n);
  SolverReport rep;
  for (;;) {
    A.apply(x.span(), r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    ++rep.operator_evals;
    rep.residual_history.push_back(norm(std::span<const complex>(r)) / nb);
    if (auto s = detail::check_progress(rep.residual_history, cfg, rep.operator_evals)) {
      rep.status = *s;
      break;
    }
    axpy(cfg.alpha, r, x.span());
  }
  rep.iterations = rep.residual_history.size() - 1;
  rep.raw_residual = rep.residual_history.back();
  rep.wall_time = clock.seconds();
  return {std::move(x), std::move(rep)};
}

}  // namespace usplit
