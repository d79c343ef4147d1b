#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "usplit/splitting/split_system.hpp"

namespace usplit {

/// Delay equation  -dx/dt = a(t) x(t) + b(t) x(lambda t)  for t >= t0, with x = x0 for t < t0.
/// Unknowns live at the nodes t0 + j dt covering [t0, t_end].
struct PantographSpec {
  double lambda = 0.5;
  std::function<complex(double)> a;
  std::function<complex(double)> b;
  std::function<complex(double)> x0;
  double t0 = 0.0;
  double t_end = 1.0;
  double dt = 0.01;
};

using SparseMatrix = Eigen::SparseMatrix<complex, Eigen::ColMajor>;

namespace detail {

inline LinearMap sparse_map(std::shared_ptr<const SparseMatrix> m) {
  const auto n = static_cast<std::size_t>(m->rows());
  auto fwd = [m](std::span<const complex> in, std::span<complex> out) {
    Eigen::Map<const Eigen::VectorXcd> x(in.data(), static_cast<Eigen::Index>(in.size()));
    Eigen::Map<Eigen::VectorXcd> y(out.data(), static_cast<Eigen::Index>(out.size()));
    y.noalias() = *m * x;
  };
  auto adj = [m](std::span<const complex> in, std::span<complex> out) {
    Eigen::Map<const Eigen::VectorXcd> x(in.data(), static_cast<Eigen::Index>(in.size()));
    Eigen::Map<Eigen::VectorXcd> y(out.data(), static_cast<Eigen::Index>(out.size()));
    y.noalias() = m->adjoint() * x;
  };
  return LinearMap(n, fwd, adj);
}

inline LinearMap sparse_solver(const SparseMatrix& m) {
  auto lu = std::make_shared<Eigen::SparseLU<SparseMatrix>>();
  lu->compute(m);
  if (lu->info() != Eigen::Success) throw SingularOperator("pantograph: sparse factorisation failed");
  auto fwd = [lu](std::span<const complex> in, std::span<complex> out) {
    Eigen::Map<const Eigen::VectorXcd> x(in.data(), static_cast<Eigen::Index>(in.size()));
    Eigen::Map<Eigen::VectorXcd> y(out.data(), static_cast<Eigen::Index>(out.size()));
    y = lu->solve(x);
  };
  return LinearMap(static_cast<std::size_t>(m.rows()), fwd);
}

}  // namespace detail

/// Discretised pieces of a pantograph problem before scaling, expressed in the weighted
/// unknown y = H^{1/2} x where H = dt diag(1/2, 1, ..., 1, 1/2) is the trapezoidal norm.
struct PantographDiscretization {
  std::vector<double> t;
  /// H^{1/2} x for the physical samples x.
  std::vector<double> weight;
  /// Derivative of the zero-extended function (including the jump at t0), in y.
  SparseMatrix derivative;
  /// x(lambda t) by linear interpolation, in y.
  SparseMatrix dilation;
  std::vector<complex> a, b;
  /// Known right-hand side (jump at t0 and history samples), in y.
  std::vector<complex> rhs;
  /// sqrt(||Dil||_1 ||Dil||_inf), an upper bound on ||Dil||_2.
  double dilation_bound = 0.0;
};

inline constexpr int kCoefficientSubsamples = 4;

/// Number of grid intervals; nodes are t0 + j dt for j = 0..n.
inline std::size_t pantograph_intervals(const PantographSpec& s) {
  return static_cast<std::size_t>(std::ceil((s.t_end - s.t0) / s.dt - 1e-9));
}

inline PantographDiscretization discretize_pantograph(const PantographSpec& s) {
  if (!(s.lambda > 0.0)) throw InvalidArgument("pantograph: lambda must be positive");
  if (!(s.dt > 0.0) || !(s.t_end > s.t0)) throw InvalidArgument("pantograph: need dt > 0 and t_end > t0");
  if (!s.a || !s.b || !s.x0) throw InvalidArgument("pantograph: a, b and x0 must be set");
  const std::size_t n = pantograph_intervals(s) + 1;
  if (n < 3) throw InvalidArgument("pantograph: grid needs at least two intervals");
  const auto ni = static_cast<Eigen::Index>(n);

  PantographDiscretization d;
  d.t.resize(n);
  d.weight.assign(n, std::sqrt(s.dt));
  d.weight.front() = d.weight.back() = std::sqrt(0.5 * s.dt);
  d.a.resize(n);
  d.b.resize(n);
  d.rhs.assign(n, complex{});
  for (std::size_t j = 0; j < n; ++j) {
    d.t[j] = s.t0 + static_cast<double>(j) * s.dt;
    // Average over the dual cell so that a jump at a node enters with half weight.
    const double lo = j == 0 ? d.t[j] : d.t[j] - 0.5 * s.dt;
    const double hi = j + 1 == n ? d.t[j] : d.t[j] + 0.5 * s.dt;
    d.a[j] = d.b[j] = complex{};
    for (int k = 0; k < kCoefficientSubsamples; ++k) {
      const double tk = lo + (hi - lo) * (k + 0.5) / kCoefficientSubsamples;
      d.a[j] += s.a(tk) / static_cast<double>(kCoefficientSubsamples);
      d.b[j] += s.b(tk) / static_cast<double>(kCoefficientSubsamples);
    }
    if (!std::isfinite(std::abs(d.a[j])) || !std::isfinite(std::abs(d.b[j])))
      throw InvalidArgument("pantograph: non-finite coefficient");
  }
  const auto& w = d.weight;
  using Triplet = Eigen::Triplet<complex>;

  // Q: centred interior, one-sided boundary rows, plus e0 e0^T for the jump at t0.
  // Q + Q^T = diag(1, 0, ..., 0, 1); the derivative in y is H^{-1/2} Q H^{-1/2}.
  std::vector<Triplet> q;
  auto add_q = [&](Eigen::Index i, Eigen::Index j, double v) {
    q.emplace_back(i, j, v / (w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)]));
  };
  add_q(0, 0, 0.5);
  add_q(0, 1, 0.5);
  for (Eigen::Index j = 1; j + 1 < ni; ++j) {
    add_q(j, j - 1, -0.5);
    add_q(j, j + 1, 0.5);
  }
  add_q(ni - 1, ni - 2, -0.5);
  add_q(ni - 1, ni - 1, 0.5);
  d.derivative.resize(ni, ni);
  d.derivative.setFromTriplets(q.begin(), q.end());

  std::vector<Triplet> dil;
  std::vector<double> col_sum(n, 0.0), row_sum(n, 0.0);
  auto add_dil = [&](std::size_t i, std::size_t j, double v) {
    const double e = w[i] * v / w[j];
    dil.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), e);
    col_sum[j] += e;
    row_sum[i] += e;
  };
  for (std::size_t j = 0; j < n; ++j) {
    const double tau = s.lambda * d.t[j];
    if (tau < s.t0) {
      d.rhs[j] -= w[j] * d.b[j] * s.x0(tau);
    } else if (tau >= d.t.back()) {
      if (tau > d.t.back() + 1e-9 * s.dt) throw InvalidArgument("pantograph: lambda * t exceeds t_end; extend t_end");
      add_dil(j, n - 1, 1.0);
    } else {
      double u = (tau - s.t0) / s.dt;
      if (std::abs(u - std::round(u)) < 1e-9) u = std::round(u);
      const auto k = std::min(static_cast<std::size_t>(u), n - 2);
      const double f = u - static_cast<double>(k);
      add_dil(j, k, 1.0 - f);
      if (f > 0.0) add_dil(j, k + 1, f);
    }
  }
  d.dilation.resize(ni, ni);
  d.dilation.setFromTriplets(dil.begin(), dil.end());
  d.dilation_bound = std::sqrt(*std::max_element(col_sum.begin(), col_sum.end()) *
                               *std::max_element(row_sum.begin(), row_sum.end()));

  // Jump x0(t0) at t0: H^{-1} e0 x0(t0) in x, i.e. e0 x0(t0) / w0 in y.
  d.rhs[0] += s.x0(s.t0) / w[0];
  return d;
}

/// Split with L = (d/dt + abar) / c and V = ((a - abar) + b Dil) / c, c real, or the
/// antisymmetrised block system built from the same raw pair.
inline SplitSystem build_pantograph_split(const PantographSpec& spec, double target_norm = kDefaultTargetNorm,
                                          bool antisymmetric = false, double alpha = kDefaultAlpha) {
  const auto d = discretize_pantograph(spec);
  const std::size_t n = d.t.size();
  const auto ni = static_cast<Eigen::Index>(n);
  const complex abar = smallest_enclosing_circle(d.a).center;
  double sup_da = 0.0, sup_b = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    sup_da = std::max(sup_da, std::abs(d.a[j] - abar));
    sup_b = std::max(sup_b, std::abs(d.b[j]));
  }
  const double v_bound = sup_da + sup_b * d.dilation_bound;

  SparseMatrix id(ni, ni);
  id.setIdentity();
  const SparseMatrix l_raw = d.derivative + abar * id;
  Eigen::VectorXcd da(ni), bv(ni);
  for (std::size_t j = 0; j < n; ++j) {
    da(static_cast<Eigen::Index>(j)) = d.a[j] - abar;
    bv(static_cast<Eigen::Index>(j)) = d.b[j];
  }
  SparseMatrix v_raw = bv.asDiagonal() * d.dilation;
  v_raw += SparseMatrix(da.asDiagonal());
  ComplexVector raw_source(d.rhs, {n}, {spec.dt});
  auto unweight = [w = d.weight, dt = spec.dt](const ComplexVector& y) {
    std::vector<complex> x(y.begin(), y.end());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] /= w[j];
    return ComplexVector(std::move(x), {x.size()}, {dt});
  };

  if (antisymmetric) {
    RawSplit raw;
    raw.L = detail::sparse_map(std::make_shared<const SparseMatrix>(l_raw));
    raw.V = detail::sparse_map(std::make_shared<const SparseMatrix>(v_raw));
    raw.normal_shifted_inverse = [l_raw, id](complex mu) {
      const SparseMatrix normal = SparseMatrix(l_raw.adjoint()) * l_raw + mu * id;
      return detail::sparse_solver(normal);
    };
    auto split = antisymmetrize(raw, raw_source, target_norm, v_bound > 0.0 ? std::optional<double>(v_bound)
                                                                           : std::nullopt);
    split.alpha = alpha;
    split.bias = abar;
    split.recover = [first = split.recover, unweight](const ComplexVector& x) { return unweight(first(x)); };
    return split;
  }

  if (abar.real() < 0.0) throw InvalidArgument("pantograph: Re abar < 0 makes L non-accretive; antisymmetrise");
  const double floor = std::max(std::abs(abar), 1.0);
  const ScaleRecord rec = compute_scalar_scale(Circle{0.0, v_bound}, target_norm, 1.0, floor);
  const double c = rec.scalar->real();

  auto l_scaled = std::make_shared<const SparseMatrix>(l_raw / c);
  auto shifted = [l_scaled, id](complex s) {
    return detail::sparse_solver(SparseMatrix(*l_scaled + s * id));
  };
  std::vector<complex> b(n);
  for (std::size_t j = 0; j < n; ++j) b[j] = d.rhs[j] / c;
  auto split = make_split_system(detail::sparse_map(l_scaled), shifted,
                                 detail::sparse_map(std::make_shared<const SparseMatrix>(v_raw / c)),
                                 ComplexVector(std::move(b), {n}, {spec.dt}), rec, v_bound / c);
  split.alpha = alpha;
  split.bias = abar;
  split.recover = unweight;
  return split;
}

/// Inhomogeneous example: lambda = 0.5, Gaussian history, a = 5 (5 - 10i after t = 6),
/// b = b0 except on [3, 5] where b = 0.
inline PantographSpec inhomogeneous_pantograph(double b0, double t_end = 10.0, double dt = 0.01) {
  PantographSpec s;
  s.lambda = 0.5;
  s.t0 = 1.0;
  s.t_end = t_end;
  s.dt = dt;
  s.x0 = [](double t) { return complex(std::exp(-50.0 * (t - 1.0) * (t - 1.0))); };
  s.a = [](double t) { return t > 6.0 ? complex(5.0, -10.0) : complex(5.0); };
  s.b = [b0](double t) { return (t >= 3.0 && t <= 5.0) ? complex{} : complex(b0); };
  return s;
}

/// Non-accretive example: lambda = 0.9, a = 0.1, b = -5, same history as above.
inline PantographSpec non_accretive_pantograph(double t_end = 10.0, double dt = 0.01) {
  PantographSpec s;
  s.lambda = 0.9;
  s.t0 = 1.0;
  s.t_end = t_end;
  s.dt = dt;
  s.x0 = [](double t) { return complex(std::exp(-50.0 * (t - 1.0) * (t - 1.0))); };
  s.a = [](double) { return complex(0.1); };
  s.b = [](double) { return complex(-5.0); };
  return s;
}

}  // namespace usplit
