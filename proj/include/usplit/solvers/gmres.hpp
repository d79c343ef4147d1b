#pragma once

#include "usplit/solvers/fixed_point.hpp"

namespace usplit {

/// Restarted GMRES(m) with modified Gram-Schmidt and one reorthogonalisation pass when
/// the vector norm drops by more than 30% during projection.
///
/// One history entry per Arnoldi step (Givens estimate); at each restart the estimate is
/// replaced by the explicitly recomputed residual, which costs one extra evaluation.
inline std::pair<ComplexVector, SolverReport> gmres_solve(const LinearMap& A, const ComplexVector& b,
                                                           const SolverConfig& cfg,
                                                           std::optional<ComplexVector> x0 = std::nullopt) {
  cfg.validate();
  if (!cfg.restart) throw InvalidArgument("gmres_solve: restart length required");
  const std::size_t n = A.dim();
  if (b.size() != n) throw InvalidArgument("gmres_solve: rhs dimension mismatch");
  detail::check_start(x0, n);
  detail::Stopwatch clock;

  const std::size_t m = std::min(*cfg.restart, n);
  const double nb = norm(b);
  if (!(nb > 0.0)) throw InvalidArgument("gmres_solve: zero rhs");

  ComplexVector x = x0 ? *x0 : ComplexVector::zeros_like(b);
  SolverReport rep;
  std::vector<std::vector<complex>> Q(m + 1, std::vector<complex>(n));
  std::vector<std::vector<complex>> H(m + 1, std::vector<complex>(m));
  std::vector<complex> cs(m), sn(m), g(m + 1), w(n);

  auto residual_into = [&](std::vector<complex>& r) {
    A.apply(x.span(), r);
    ++rep.operator_evals;
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  };

  // Solve the j x j triangular system and add the Krylov combination to x.
  auto update = [&](std::size_t j) {
    std::vector<complex> y(j);
    for (std::size_t i = j; i-- > 0;) {
      complex s = g[i];
      for (std::size_t k = i + 1; k < j; ++k) s -= H[i][k] * y[k];
      y[i] = s / H[i][i];
    }
    for (std::size_t k = 0; k < j; ++k) axpy(y[k], Q[k], x.span());
  };

  if (x0) {
    residual_into(Q[0]);
  } else {
    std::copy(b.begin(), b.end(), Q[0].begin());
  }
  double beta = norm(std::span<const complex>(Q[0]));
  rep.residual_history.push_back(beta / nb);
  std::optional<Status> status = detail::check_progress(rep.residual_history, cfg, rep.operator_evals);

  while (!status) {
    for (auto& q : Q[0]) q /= beta;
    std::fill(g.begin(), g.end(), complex{});
    g[0] = beta;
    std::size_t j = 0;
    bool breakdown = false;
    for (; j < m && !status; ++j) {
      A.apply(Q[j], w);
      ++rep.operator_evals;
      const double before = norm(std::span<const complex>(w));
      for (std::size_t i = 0; i <= j; ++i) {
        H[i][j] = dot(std::span<const complex>(Q[i]), std::span<const complex>(w));
        axpy(-H[i][j], Q[i], w);
      }
      double h = norm(std::span<const complex>(w));
      if (h < 0.7 * before) {
        for (std::size_t i = 0; i <= j; ++i) {
          const complex c = dot(std::span<const complex>(Q[i]), std::span<const complex>(w));
          H[i][j] += c;
          axpy(-c, Q[i], w);
        }
        h = norm(std::span<const complex>(w));
      }
      breakdown = h <= 1e-14 * before;
      if (!breakdown)
        for (std::size_t i = 0; i < n; ++i) Q[j + 1][i] = w[i] / h;

      for (std::size_t i = 0; i < j; ++i) {
        const complex t = std::conj(cs[i]) * H[i][j] + std::conj(sn[i]) * H[i + 1][j];
        H[i + 1][j] = -sn[i] * H[i][j] + cs[i] * H[i + 1][j];
        H[i][j] = t;
      }
      const double den = std::hypot(std::abs(H[j][j]), h);
      if (den == 0.0) {
        breakdown = true;
        status = Status::stagnated;
        break;
      }
      cs[j] = H[j][j] / den;
      sn[j] = h / den;
      H[j][j] = den;
      g[j + 1] = -sn[j] * g[j];
      g[j] = std::conj(cs[j]) * g[j];

      rep.residual_history.push_back(std::abs(g[j + 1]) / nb);
      status = detail::check_progress(rep.residual_history, cfg, rep.operator_evals);
      if (breakdown && !status) status = Status::stagnated;
    }
    update(j);
    if (status) break;

    // Restart from the explicit residual.
    residual_into(Q[0]);
    beta = norm(std::span<const complex>(Q[0]));
    rep.residual_history.back() = beta / nb;
    status = detail::check_progress(rep.residual_history, cfg, rep.operator_evals);
  }
  rep.status = *status;
  rep.iterations = rep.residual_history.size() - 1;
  rep.wall_time = clock.seconds();
  return {std::move(x), std::move(rep)};
}

}  // namespace usplit
