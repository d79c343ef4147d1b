#pragma once

#include "usplit/solvers/fixed_point.hpp"

namespace usplit {

/// BiCGSTAB with shadow residual r0. Two evaluations per iteration, one history entry per
/// iteration; a converged half step ends the run after a single evaluation.
inline std::pair<ComplexVector, SolverReport> bicgstab_solve(const LinearMap& A, const ComplexVector& b,
                                                              const SolverConfig& cfg,
                                                              std::optional<ComplexVector> x0 = std::nullopt) {
  cfg.validate();
  const std::size_t n = A.dim();
  if (b.size() != n) throw InvalidArgument("bicgstab_solve: rhs dimension mismatch");
  detail::check_start(x0, n);
  detail::Stopwatch clock;

  const double nb = norm(b);
  if (!(nb > 0.0)) throw InvalidArgument("bicgstab_solve: zero rhs");
  ComplexVector x = x0 ? *x0 : ComplexVector::zeros_like(b);
  SolverReport rep;

  std::vector<complex> r(n), p(n), v(n), s(n), t(n);
  if (x0) {
    A.apply(x.span(), r);
    ++rep.operator_evals;
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  } else {
    std::copy(b.begin(), b.end(), r.begin());
  }
  const std::vector<complex> shadow = r;
  const double shadow_norm = norm(std::span<const complex>(shadow));
  p = r;
  complex rho = dot(std::span<const complex>(shadow), std::span<const complex>(r));
  rep.residual_history.push_back(norm(std::span<const complex>(r)) / nb);
  std::optional<Status> status = detail::check_progress(rep.residual_history, cfg, rep.operator_evals, 2.0);

  constexpr double kBreakdown = 1e-30;
  while (!status) {
    A.apply(p, v);
    ++rep.operator_evals;
    const complex sv = dot(std::span<const complex>(shadow), std::span<const complex>(v));
    if (std::abs(sv) <= kBreakdown * shadow_norm * norm(std::span<const complex>(v)) || sv == complex{}) {
      status = Status::stagnated;
      rep.message = "breakdown: <r0, A p> vanished";
      break;
    }
    const complex alpha = rho / sv;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    const double s_rel = norm(std::span<const complex>(s)) / nb;
    if (s_rel <= cfg.tol) {
      axpy(alpha, p, x.span());
      rep.residual_history.push_back(s_rel);
      status = Status::converged;
      break;
    }
    A.apply(s, t);
    ++rep.operator_evals;
    const double tt = norm_squared(std::span<const complex>(t));
    const complex omega = tt > 0.0 ? dot(std::span<const complex>(t), std::span<const complex>(s)) / tt : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i] + omega * s[i];
      r[i] = s[i] - omega * t[i];
    }
    rep.residual_history.push_back(norm(std::span<const complex>(r)) / nb);
    status = detail::check_progress(rep.residual_history, cfg, rep.operator_evals, 2.0);
    if (status) break;
    if (std::abs(omega) == 0.0) {
      status = Status::stagnated;
      rep.message = "breakdown: omega vanished";
      break;
    }
    const complex rho_new = dot(std::span<const complex>(shadow), std::span<const complex>(r));
    if (std::abs(rho_new) <= kBreakdown * shadow_norm * norm(std::span<const complex>(r))) {
      status = Status::stagnated;
      rep.message = "breakdown: rho vanished";
      break;
    }
    const complex beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
  }
  rep.status = *status;
  rep.iterations = rep.residual_history.size() - 1;
  rep.wall_time = clock.seconds();
  return {std::move(x), std::move(rep)};
}

}  // namespace usplit
