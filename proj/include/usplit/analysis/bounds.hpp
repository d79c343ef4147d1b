#pragma once

#include <numbers>
#include <optional>

#include <Eigen/Eigenvalues>

#include "usplit/core/dense.hpp"

namespace usplit {

struct ContractionNorm {
  /// ||1 - alpha B (A+B)^{-1} A|| from the singular values.
  double svd = 0.0;
  /// The same norm from the Hermitian pencil form sqrt(1 + lambda_max(P, Q)).
  double lemma = 0.0;
};

namespace detail {

inline DenseMatrix checked_inverse(const DenseMatrix& m, const char* what) {
  try {
    return dense_inverse(DenseOperator(m)).entries;
  } catch (const SingularOperator&) {
    throw SingularOperator(std::string("analysis: ") + what + " is singular");
  }
}

inline DenseMatrix identity_like(const DenseMatrix& m) { return DenseMatrix::Identity(m.rows(), m.cols()); }

inline double spectral_norm(const DenseMatrix& m) {
  return Eigen::JacobiSVD<DenseMatrix>(m).singularValues()(0);
}

inline bool is_hermitian(const DenseMatrix& m, double tol = 1e-12) {
  return (m - m.adjoint()).norm() <= tol * std::max(1.0, m.norm());
}

}  // namespace detail

/// Exact ||M|| for M = 1 - alpha B (A+B)^{-1} A, by SVD and by the pencil identity
/// ||1 - W^{-1}||^2 = 1 + sup (||x||^2 - 2 Re<x, W x>) / ||W x||^2, W = (A^{-1} + B^{-1}) / alpha.
inline ContractionNorm contraction_norm_dense(const DenseOperator& A, const DenseOperator& B, double alpha) {
  const DenseMatrix& a = A.entries;
  const DenseMatrix& b = B.entries;
  if (a.rows() != b.rows()) throw InvalidArgument("contraction_norm_dense: dimension mismatch");
  const DenseMatrix id = detail::identity_like(a);
  if (alpha == 0.0) return {1.0, 1.0};
  const DenseMatrix sum_inv = detail::checked_inverse(a + b, "A + B");
  const DenseMatrix m = id - alpha * b * sum_inv * a;

  ContractionNorm out;
  out.svd = detail::spectral_norm(m);

  const DenseMatrix w = (detail::checked_inverse(a, "A") + detail::checked_inverse(b, "B")) / alpha;
  const DenseMatrix p = id - w - w.adjoint();
  const DenseMatrix q = w.adjoint() * w;
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> ges(p, q, Eigen::EigenvaluesOnly);
  out.lemma = std::sqrt(std::max(0.0, 1.0 + ges.eigenvalues().maxCoeff()));
  return out;
}

/// Threshold 2 * min eig of the Hermitian part of A^{-1} + B^{-1}; ||M|| < 1 iff alpha is below it.
inline double alpha_max_dense(const DenseOperator& A, const DenseOperator& B) {
  const DenseMatrix s = detail::checked_inverse(A.entries, "A") + detail::checked_inverse(B.entries, "B");
  return 2.0 * hermitian_min_eigenvalue(s);
}

struct ConditionBound {
  double kappa_bound;
  double v_opt;
};

/// (1 + sqrt(2S))^2 and the ||V|| that attains it.
inline ConditionBound condition_number_bound(double S) {
  if (!(S > 0.0)) throw InvalidArgument("condition_number_bound: S must be positive");
  const double r = 1.0 + std::sqrt(2.0 * S);
  return {r * r, std::sqrt(S) / (std::sqrt(S) + std::sqrt(2.0))};
}

/// Worst-case fixed-point contraction at the optimal scaling and step size.
inline double convergence_rate_bound(double S, bool hermitian) {
  if (!(S > 0.0)) throw InvalidArgument("convergence_rate_bound: S must be positive");
  const double r = 1.0 + std::sqrt(2.0 * S);
  if (hermitian) return 1.0 - 1.0 / (r + S);
  return std::sqrt(1.0 - 1.0 / (r * r * r * r));
}

struct BoundReport {
  double S = 0.0;
  double v_norm = 0.0;
  double alpha = 0.0;
  double kappa_measured = 0.0;
  double kappa_bound = 0.0;
  double m_norm_measured = 0.0;
  double m_norm_bound = 0.0;
  bool hermitian = false;
  std::optional<double> lambda_min, lambda_max;
};

/// Rescale (A, V) by a common real factor so that ||V|| = v_opt(S).
inline std::pair<DenseMatrix, DenseMatrix> scale_to_optimal(const DenseMatrix& A, const DenseMatrix& V) {
  const double vn = detail::spectral_norm(V);
  if (!(vn > 0.0)) throw InvalidArgument("scale_to_optimal: V must be non-zero");
  const double S = detail::spectral_norm(detail::checked_inverse(A, "A")) * vn;
  const double c = vn / condition_number_bound(S).v_opt;
  return {A / c, V / c};
}

/// Measured condition number and contraction against their closed-form bounds for the
/// split A = L + V, B = 1 - V. The step size is Re[B^{-1}] in general and
/// 2 / (lambda_min + lambda_max) of (A^{-1} + B^{-1})^{-1} when A and V are Hermitian.
/// The bounds assume ||V|| = v_opt(S); see scale_to_optimal.
inline BoundReport dense_bound_report(const DenseMatrix& A, const DenseMatrix& V) {
  BoundReport r;
  const DenseMatrix id = detail::identity_like(A);
  const DenseMatrix b = id - V;
  const DenseMatrix a_inv = detail::checked_inverse(A, "A");
  const DenseMatrix b_inv = detail::checked_inverse(b, "B");
  const DenseMatrix s = a_inv + b_inv;
  const DenseMatrix s_inv = detail::checked_inverse(s, "A^{-1} + B^{-1}");

  r.v_norm = detail::spectral_norm(V);
  r.S = detail::spectral_norm(a_inv) * r.v_norm;
  r.kappa_measured = detail::spectral_norm(s) * detail::spectral_norm(s_inv);
  r.kappa_bound = condition_number_bound(r.S).kappa_bound;
  r.hermitian = detail::is_hermitian(A) && detail::is_hermitian(V);
  if (r.hermitian) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (s_inv + s_inv.adjoint()), Eigen::EigenvaluesOnly);
    r.lambda_min = es.eigenvalues().minCoeff();
    r.lambda_max = es.eigenvalues().maxCoeff();
    r.alpha = 2.0 / (*r.lambda_min + *r.lambda_max);
  } else {
    r.alpha = hermitian_min_eigenvalue(b_inv);
  }
  r.m_norm_measured = contraction_norm_dense(DenseOperator(A), DenseOperator(b), r.alpha).svd;
  r.m_norm_bound = convergence_rate_bound(r.S, r.hermitian);
  return r;
}

/// A preconditioner of the form Gamma^{-1} = beta_B (A + B)^{-1} alpha_B + gamma_B, with
/// (A^H + B^H)^{-1} in place of (A + B)^{-1} when `adjoint` is set.
struct PreconditionerCandidate {
  DenseMatrix B;
  DenseMatrix alpha_B;
  DenseMatrix beta_B;
  DenseMatrix gamma_B;
  bool adjoint = false;

  /// The universal form: beta_B = B, alpha_B = alpha, gamma_B = 0.
  static PreconditionerCandidate universal(const DenseMatrix& B, complex alpha) {
    const auto n = B.rows();
    return {B, alpha * DenseMatrix::Identity(n, n), B, DenseMatrix::Zero(n, n), false};
  }

  DenseMatrix contraction(const DenseMatrix& A) const {
    const DenseMatrix core = adjoint ? DenseMatrix(A.adjoint() + B.adjoint()) : DenseMatrix(A + B);
    const DenseMatrix g = beta_B * detail::checked_inverse(core, "A + B") * alpha_B + gamma_B;
    return detail::identity_like(A) - g * A;
  }
};

struct Counterexample {
  DenseMatrix A;
  Eigen::VectorXcd witness;
  /// ||M witness|| / ||witness|| - 1; positive when the candidate fails to contract.
  double violation = -std::numeric_limits<double>::infinity();
};

/// Search the operator family used against `condition` (1..5; 6 is the adjoint variant)
/// for the accretive A and vector that most violate ||M|| < 1 for `cand`.
///
/// 1: A = k; 2: A = 1 except A_jj = k^{-2} with small k; 3: the family of 2 in a basis
/// rotated by pi/4 in the (i, j) plane; 4: the family of 2 with large k, in both bases;
/// 5: A = e^{i phi} / k; 6: A = k e^{i phi}. k = 1e3 and phi takes 16 values.
/// The witness is the better of the constructive vector and the top right singular vector.
inline Counterexample uniqueness_counterexample(int condition, const PreconditionerCandidate& cand,
                                                double k = 1e3, int n_phi = 16) {
  if (condition < 1 || condition > 6) throw InvalidArgument("uniqueness_counterexample: condition must be 1..6");
  const auto n = cand.B.rows();
  if (n < 2 && (condition >= 2 && condition <= 4))
    throw InvalidArgument("uniqueness_counterexample: conditions 2-4 need dimension >= 2");
  const DenseMatrix id = DenseMatrix::Identity(n, n);
  Counterexample best;

  auto consider = [&](const DenseMatrix& A, std::optional<Eigen::VectorXcd> x) {
    const DenseMatrix m = cand.contraction(A);
    Eigen::JacobiSVD<DenseMatrix> svd(m, Eigen::ComputeFullV);
    std::vector<Eigen::VectorXcd> trials{svd.matrixV().col(0)};
    if (x) {
      // Witness y = Omega^{-1} x for Omega = Gamma^{-1} A = 1 - M.
      const DenseMatrix omega = id - m;
      trials.push_back(omega.fullPivLu().solve(*x));
    }
    for (const auto& y : trials) {
      const double v = (m * y).norm() / y.norm() - 1.0;
      if (std::isfinite(v) && v > best.violation) {
        best.A = A;
        best.witness = y;
        best.violation = v;
      }
    }
  };

  auto phase = [&](int p, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(p) / static_cast<double>(n_phi - 1);
  };

  auto pair_family = [&](double kk, double theta) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        DenseMatrix rot = id;
        rot(i, i) = std::cos(theta);
        rot(i, j) = -std::sin(theta);
        rot(j, i) = std::sin(theta);
        rot(j, j) = std::cos(theta);
        DenseMatrix A = id;
        A(j, j) = 1.0 / (kk * kk);
        A = rot * A * rot.adjoint();
        for (int p = 0; p < n_phi; ++p) {
          Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
          x(i) = kk;
          x(j) = std::polar(1.0, phase(p, -std::numbers::pi, std::numbers::pi));
          x /= std::sqrt(1.0 + kk * kk);
          consider(A, Eigen::VectorXcd(rot * x));
        }
      }
  };

  switch (condition) {
    case 1: consider(k * id, std::nullopt); break;
    case 2: pair_family(1.0 / k, 0.0); break;
    case 3: pair_family(1.0 / k, std::numbers::pi / 4); break;
    case 4:
      pair_family(k, 0.0);
      pair_family(k, std::numbers::pi / 4);
      break;
    case 5:
      for (int p = 0; p < n_phi; ++p)
        consider(std::polar(1.0 / k, phase(p, -std::numbers::pi / 2, std::numbers::pi / 2)) * id, std::nullopt);
      break;
    case 6:
      for (int p = 0; p < n_phi; ++p)
        consider(std::polar(k, phase(p, -std::numbers::pi / 2, std::numbers::pi / 2)) * id, std::nullopt);
      break;
  }
  return best;
}

}  // namespace usplit
