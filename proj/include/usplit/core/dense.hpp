#pragma once

#include <Eigen/Dense>
#include <limits>

#include "usplit/core/linear_map.hpp"

namespace usplit {

using DenseMatrix = Eigen::MatrixXcd;

/// Largest dimension for which dense oracles are used.
inline constexpr std::size_t kDenseOracleCap = 64;

/// Small dense operator used as an oracle backing for matrix-free code paths.
struct DenseOperator {
  DenseMatrix entries;

  DenseOperator() = default;
  explicit DenseOperator(DenseMatrix m) : entries(std::move(m)) {
    if (entries.rows() != entries.cols()) throw InvalidArgument("DenseOperator: matrix must be square");
  }

  std::size_t dim() const { return static_cast<std::size_t>(entries.rows()); }

  LinearMap to_map() const {
    auto m = std::make_shared<const DenseMatrix>(entries);
    const auto n = entries.rows();
    auto fwd = [m, n](std::span<const complex> in, std::span<complex> out) {
      Eigen::Map<const Eigen::VectorXcd> x(in.data(), n);
      Eigen::Map<Eigen::VectorXcd> y(out.data(), n);
      y.noalias() = (*m) * x;
    };
    auto adj = [m, n](std::span<const complex> in, std::span<complex> out) {
      Eigen::Map<const Eigen::VectorXcd> x(in.data(), n);
      Eigen::Map<Eigen::VectorXcd> y(out.data(), n);
      y.noalias() = m->adjoint() * x;
    };
    return LinearMap(dim(), fwd, adj);
  }

  Eigen::VectorXd singular_values() const {
    return Eigen::JacobiSVD<DenseMatrix>(entries).singularValues();
  }

  double norm() const { return singular_values()(0); }

  /// sigma_max / sigma_min; infinity for singular matrices.
  double condition_number() const {
    const auto s = singular_values();
    const double smin = s(s.size() - 1);
    return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
  }

  DenseMatrix hermitian_part() const { return 0.5 * (entries + entries.adjoint()); }
};

/// Materialise a matrix-free operator column by column (one apply per column).
inline DenseOperator realize(const LinearMap& map) {
  const auto n = map.dim();
  DenseMatrix m(n, n);
  std::vector<complex> e(n), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), complex{});
    e[j] = 1.0;
    map.apply(e, col);
    for (std::size_t i = 0; i < n; ++i) m(i, j) = col[i];
  }
  return DenseOperator(std::move(m));
}

/// Smallest eigenvalue of (M + M^H)/2, the exact infimum of Re<x, Mx> over unit vectors.
inline double hermitian_min_eigenvalue(const DenseMatrix& m) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline double hermitian_max_eigenvalue(const DenseMatrix& m) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

/// Inverse of a dense operator. Throws SingularOperator when the condition number
/// reaches 1e12.
inline DenseOperator dense_inverse(const DenseOperator& op) {
  if (op.dim() == 0) throw InvalidArgument("dense_inverse: empty operator");
  const double kappa = op.condition_number();
  if (!(kappa < 1e12)) throw SingularOperator("dense_inverse: operator is singular to working tolerance");
  return DenseOperator(op.entries.fullPivLu().inverse());
}

}  // namespace usplit
