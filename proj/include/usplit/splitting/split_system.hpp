#pragma once

#include <functional>
#include <optional>

#include "usplit/core/estimates.hpp"
#include "usplit/splitting/scaling.hpp"

namespace usplit {

inline constexpr double kDefaultAlpha = 0.75;

/// Canonical split problem A x = b with A = L + V, B = 1 - V and ||V|| < 1.
///
/// `shifted_inverse(s)` realises (L + s)^{-1}; `inv_L_plus_I` is the s = 1 instance. The
/// forward operator is never stored separately: A = (L + 1) - B.
struct SplitSystem {
  LinearMap L;
  LinearMap inv_L_plus_I;
  LinearMap B;
  std::function<LinearMap(complex)> shifted_inverse;
  ScaleRecord scale;
  /// Scalar bias absorbed into L (raw units), when the problem has one.
  std::optional<complex> bias;
  double alpha = kDefaultAlpha;
  ComplexVector source;
  double certified_V_norm = 0.0;
  /// True when certified_V_norm comes from power iteration instead of a structural bound.
  bool v_norm_estimated = false;
  /// Maps a canonical solution back to the physical unknown (crop, unscale, drop auxiliaries).
  std::function<ComplexVector(const ComplexVector&)> recover;

  std::size_t dim() const { return B.dim(); }

  /// V = 1 - B
  LinearMap V() const { return combine(identity_map(dim()), B, -1.0); }

  /// A = L + 1 - B
  LinearMap forward() const {
    const LinearMap l = L, b = B;
    auto fwd = [l, b](std::span<const complex> in, std::span<complex> out) {
      std::vector<complex> tmp(in.size());
      l.apply(in, out);
      b.apply(in, tmp);
      for (std::size_t i = 0; i < in.size(); ++i) out[i] += in[i] - tmp[i];
    };
    LinearMap::Kernel adj;
    if (l.has_adjoint() && b.has_adjoint()) {
      adj = [l, b](std::span<const complex> in, std::span<complex> out) {
        std::vector<complex> tmp(in.size());
        l.apply_adjoint(in, out);
        b.apply_adjoint(in, tmp);
        for (std::size_t i = 0; i < in.size(); ++i) out[i] += in[i] - tmp[i];
      };
    }
    return LinearMap(dim(), fwd, adj);
  }

  LinearMap L_plus_I() const { return combine(L, identity_map(dim())); }

  SplitSystem with_alpha(double a) const {
    if (!(a > 0.0)) throw InvalidArgument("SplitSystem: alpha must be positive");
    SplitSystem s = *this;
    s.alpha = a;
    return s;
  }

  ComplexVector physical(const ComplexVector& x) const { return recover ? recover(x) : x; }
};

/// Assemble a SplitSystem from L, a factory for (L + s)^{-1}, and V.
inline SplitSystem make_split_system(LinearMap L, std::function<LinearMap(complex)> shifted_inverse,
                                     const LinearMap& V, ComplexVector source, ScaleRecord scale,
                                     double certified_V_norm, bool v_norm_estimated = false) {
  if (L.dim() != V.dim() || source.size() != V.dim())
    throw InvalidArgument("make_split_system: dimension mismatch");
  if (!(certified_V_norm < 1.0))
    throw InvalidArgument("make_split_system: certified ||V|| must be below 1");
  SplitSystem s;
  s.L = std::move(L);
  s.inv_L_plus_I = shifted_inverse(1.0);
  s.shifted_inverse = std::move(shifted_inverse);
  s.B = combine(identity_map(V.dim()), V, -1.0);
  s.scale = std::move(scale);
  s.source = std::move(source);
  s.certified_V_norm = certified_V_norm;
  s.v_norm_estimated = v_norm_estimated;
  return s;
}

/// Split system built around dense matrices; used by tests and the analysis module.
inline SplitSystem dense_split_system(const DenseMatrix& A, const DenseMatrix& V, const ComplexVector& b,
                                      double alpha = kDefaultAlpha) {
  const DenseOperator L(A - V);
  const auto n = A.rows();
  auto factory = [L, n](complex s) {
    return dense_inverse(DenseOperator(L.entries + s * DenseMatrix::Identity(n, n))).to_map();
  };
  const double vn = DenseOperator(V).norm();
  ScaleRecord rec;
  rec.scalar = 1.0;
  auto split = make_split_system(L.to_map(), factory, DenseOperator(V).to_map(), b, rec, vn);
  split.alpha = alpha;
  return split;
}

/// The preconditioned operator Gamma^{-1} A = alpha B [1 - (L+1)^{-1} B] in the form that
/// needs exactly one (L+1)^{-1} per evaluation, its complement M = 1 - Gamma^{-1} A, and
/// the preconditioned source Gamma^{-1} b = alpha B (L+1)^{-1} b.
struct PreconditionedSystem {
  SplitSystem split;
  LinearMap precond_op;
  LinearMap M_op;
  ComplexVector precond_source;
};

inline PreconditionedSystem build_preconditioned(const SplitSystem& split) {
  if (!(split.certified_V_norm < 1.0)) throw InvalidArgument("build_preconditioned: ||V|| must be below 1");
  const LinearMap B = split.B, inv = split.inv_L_plus_I;
  const complex a = split.alpha;
  auto fwd = [B, inv, a](std::span<const complex> in, std::span<complex> out) {
    std::vector<complex> t1(in.size()), t2(in.size());
    B.apply(in, t1);
    inv.apply(t1, t2);
    for (std::size_t i = 0; i < in.size(); ++i) t2[i] = in[i] - t2[i];
    B.apply(t2, out);
    for (auto& v : out) v *= a;
  };
  LinearMap::Kernel adj;
  if (B.has_adjoint() && inv.has_adjoint()) {
    // (alpha B [1 - inv B])^H = conj(alpha) [1 - B^H inv^H] B^H
    adj = [B, inv, a](std::span<const complex> in, std::span<complex> out) {
      std::vector<complex> t1(in.size()), t2(in.size()), t3(in.size());
      B.apply_adjoint(in, t1);
      inv.apply_adjoint(t1, t2);
      B.apply_adjoint(t2, t3);
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::conj(a) * (t1[i] - t3[i]);
    };
  }
  PreconditionedSystem p;
  p.split = split;
  p.precond_op = LinearMap(split.dim(), fwd, adj);
  p.M_op = combine(identity_map(split.dim()), p.precond_op, -1.0);
  auto t = split.inv_L_plus_I(split.source);
  p.precond_source = split.B(t);
  p.precond_source *= a;
  p.precond_source.set_shape(split.source.shape(), split.source.spacing());
  return p;
}

/// Raw (unscaled) operator pair for the antisymmetrised construction.
struct RawSplit {
  LinearMap L;
  LinearMap V;
  /// Optional solver for (L^H L + mu)^{-1}; a conjugate-gradient fallback is used otherwise.
  std::function<LinearMap(complex mu)> normal_shifted_inverse;
};

namespace detail {

/// Conjugate gradients for (L^H L + mu) y = r with real mu > 0, to relative accuracy 1e-14.
inline LinearMap normal_cg_inverse(const LinearMap& L, double mu) {
  auto fwd = [L, mu](std::span<const complex> r, std::span<complex> y) {
    const auto n = r.size();
    std::vector<complex> res(r.begin(), r.end()), p(res), q(n), t(n);
    std::fill(y.begin(), y.end(), complex{});
    double rr = norm_squared(res);
    const double stop = 1e-28 * rr;
    for (std::size_t it = 0; it < 10 * n + 100 && rr > stop; ++it) {
      L.apply(p, t);
      L.apply_adjoint(t, q);
      for (std::size_t i = 0; i < n; ++i) q[i] += mu * p[i];
      const double step = rr / dot(std::span<const complex>(p), std::span<const complex>(q)).real();
      axpy(step, p, y);
      axpy(-step, q, res);
      const double rr_new = norm_squared(res);
      for (std::size_t i = 0; i < n; ++i) p[i] = res[i] + (rr_new / rr) * p[i];
      rr = rr_new;
    }
  };
  return LinearMap(L.dim(), fwd, fwd);
}

}  // namespace detail

/// Embed a possibly non-accretive raw problem (L + V) x = b into the skew-Hermitian block
/// system c^{-1} [[0, -A^H], [A, 0]] [x; x'] = c^{-1} [0; b] with real c chosen so that
/// ||V_block|| = target_norm. The auxiliary adjoint source is zero.
///
/// `v_norm_bound` should be a rigorous upper bound on ||V||; when omitted it is estimated
/// by power iteration and the result is flagged as an estimate.
inline SplitSystem antisymmetrize(const RawSplit& raw, const ComplexVector& raw_source,
                                  double target_norm = kDefaultTargetNorm,
                                  std::optional<double> v_norm_bound = std::nullopt) {
  if (!raw.L.has_adjoint() || !raw.V.has_adjoint())
    throw MissingCapability("antisymmetrize: raw L and V must provide adjoints");
  if (raw.L.dim() != raw.V.dim() || raw_source.size() != raw.L.dim())
    throw InvalidArgument("antisymmetrize: dimension mismatch");
  const std::size_t n = raw.L.dim();

  bool estimated = false;
  double vb = 0.0;
  if (v_norm_bound) {
    vb = *v_norm_bound;
  } else {
    vb = operator_norm_estimate(raw.V).value;
    estimated = true;
  }
  const Circle circ{0.0, vb};
  ScaleRecord rec = compute_scalar_scale(circ, target_norm, 1.0, 1.0);
  const double c = rec.scalar->real();

  const LinearMap L = raw.L, V = raw.V;
  // [[0, -X^H], [X, 0]] / c
  auto block = [n, c](const LinearMap& X) {
    auto fwd = [X, n, c](std::span<const complex> in, std::span<complex> out) {
      X.apply_adjoint(in.subspan(n, n), out.subspan(0, n));
      X.apply(in.subspan(0, n), out.subspan(n, n));
      for (std::size_t i = 0; i < n; ++i) out[i] = -out[i] / c;
      for (std::size_t i = n; i < 2 * n; ++i) out[i] /= c;
    };
    // The block is skew-Hermitian: its adjoint is its negative.
    auto adj = [fwd](std::span<const complex> in, std::span<complex> out) {
      fwd(in, out);
      for (auto& v : out) v = -v;
    };
    return LinearMap(2 * n, fwd, adj);
  };

  auto normal = raw.normal_shifted_inverse;
  auto factory = [L, n, c, normal](complex s) {
    if (s == complex{}) throw SingularOperator("antisymmetrize: shift must be non-zero");
    const complex mu = c * c * s * s;
    LinearMap solve;
    if (normal) {
      solve = normal(mu);
    } else {
      if (std::abs(mu.imag()) > 0.0 || !(mu.real() > 0.0))
        throw MissingCapability("antisymmetrize: complex shifts need a normal_shifted_inverse");
      solve = detail::normal_cg_inverse(L, mu.real());
    }
    // (s + l_blk)^{-1} [r1; r2]:  (s^2 + l^H l) x1 = s r1 + l^H r2,  x2 = (r2 - l x1) / s
    auto fwd = [L, solve, n, c, s](std::span<const complex> in, std::span<complex> out) {
      std::vector<complex> t(n), rhs(n);
      L.apply_adjoint(in.subspan(n, n), t);
      for (std::size_t i = 0; i < n; ++i) rhs[i] = c * c * s * in[i] + c * t[i];
      solve.apply(rhs, out.subspan(0, n));
      L.apply(out.subspan(0, n), t);
      for (std::size_t i = 0; i < n; ++i) out[n + i] = (in[n + i] - t[i] / c) / s;
    };
    return LinearMap(2 * n, fwd);
  };

  std::vector<complex> b(2 * n);
  for (std::size_t i = 0; i < n; ++i) b[n + i] = raw_source[i] / c;
  std::vector<std::size_t> shape{2};
  for (auto e : raw_source.shape()) shape.push_back(e);

  auto split = make_split_system(block(L), factory, block(V), ComplexVector(std::move(b), shape), rec,
                                 vb / c, estimated);
  const auto raw_shape = raw_source.shape();
  const auto raw_spacing = raw_source.spacing();
  split.recover = [n, raw_shape, raw_spacing](const ComplexVector& x) {
    std::vector<complex> d(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
    return ComplexVector(std::move(d), raw_shape, raw_spacing);
  };
  return split;
}

}  // namespace usplit
