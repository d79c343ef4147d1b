#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <utility>

#include "usplit/core/vector.hpp"

namespace usplit {

/// Matrix-free linear operator. The apply kernels are immutable; only the evaluation
/// counter changes, and it is safe under concurrent increment. Copies share the counter.
class LinearMap {
 public:
  using Kernel = std::function<void(std::span<const complex> in, std::span<complex> out)>;

  LinearMap() = default;

  LinearMap(std::size_t dim, Kernel apply, Kernel adjoint = {})
      : dim_(dim),
        apply_(std::make_shared<Kernel>(std::move(apply))),
        adjoint_(adjoint ? std::make_shared<Kernel>(std::move(adjoint)) : nullptr),
        counter_(std::make_shared<std::atomic<std::size_t>>(0)) {
    if (dim_ == 0) throw InvalidArgument("LinearMap: dimension must be positive");
  }

  std::size_t dim() const { return dim_; }
  bool valid() const { return apply_ != nullptr; }
  bool has_adjoint() const { return adjoint_ != nullptr; }

  void apply(std::span<const complex> in, std::span<complex> out) const {
    check(in.size(), out.size());
    counter_->fetch_add(1, std::memory_order_relaxed);
    (*apply_)(in, out);
  }

  void apply_adjoint(std::span<const complex> in, std::span<complex> out) const {
    if (!adjoint_) throw MissingCapability("LinearMap: adjoint not available");
    check(in.size(), out.size());
    counter_->fetch_add(1, std::memory_order_relaxed);
    (*adjoint_)(in, out);
  }

  ComplexVector operator()(const ComplexVector& x) const {
    auto y = ComplexVector::zeros_like(x);
    apply(x.span(), y.span());
    return y;
  }

  ComplexVector adjoint(const ComplexVector& x) const {
    auto y = ComplexVector::zeros_like(x);
    apply_adjoint(x.span(), y.span());
    return y;
  }

  /// Operator exchanging the roles of apply and adjoint. Shares the counter.
  LinearMap adjoint_map() const {
    if (!adjoint_) throw MissingCapability("LinearMap: adjoint not available");
    LinearMap m = *this;
    std::swap(m.apply_, m.adjoint_);
    return m;
  }

  std::size_t evals() const { return counter_ ? counter_->load(std::memory_order_relaxed) : 0; }
  void reset_evals() const {
    if (counter_) counter_->store(0, std::memory_order_relaxed);
  }

 private:
  void check(std::size_t in, std::size_t out) const {
    if (!apply_) throw InvalidArgument("LinearMap: empty operator");
    if (in != dim_ || out != dim_) throw InvalidArgument("LinearMap: dimension mismatch");
  }

  std::size_t dim_ = 0;
  std::shared_ptr<const Kernel> apply_;
  std::shared_ptr<const Kernel> adjoint_;
  std::shared_ptr<std::atomic<std::size_t>> counter_;
};

// Composition helpers. Each returns a fresh LinearMap with its own counter; the inner maps
// still count their own evaluations.

inline LinearMap identity_map(std::size_t n) {
  auto k = [](std::span<const complex> in, std::span<complex> out) {
    std::copy(in.begin(), in.end(), out.begin());
  };
  return LinearMap(n, k, k);
}

inline LinearMap scaled(const LinearMap& a, complex s) {
  auto fwd = [a, s](std::span<const complex> in, std::span<complex> out) {
    a.apply(in, out);
    for (auto& v : out) v *= s;
  };
  LinearMap::Kernel adj;
  if (a.has_adjoint()) {
    adj = [a, s](std::span<const complex> in, std::span<complex> out) {
      a.apply_adjoint(in, out);
      for (auto& v : out) v *= std::conj(s);
    };
  }
  return LinearMap(a.dim(), fwd, adj);
}

/// x -> a(x) + s * b(x)
inline LinearMap combine(const LinearMap& a, const LinearMap& b, complex s = 1.0) {
  if (a.dim() != b.dim()) throw InvalidArgument("combine: dimension mismatch");
  auto fwd = [a, b, s](std::span<const complex> in, std::span<complex> out) {
    std::vector<complex> tmp(in.size());
    a.apply(in, out);
    b.apply(in, tmp);
    axpy(s, tmp, out);
  };
  LinearMap::Kernel adj;
  if (a.has_adjoint() && b.has_adjoint()) {
    adj = [a, b, s](std::span<const complex> in, std::span<complex> out) {
      std::vector<complex> tmp(in.size());
      a.apply_adjoint(in, out);
      b.apply_adjoint(in, tmp);
      axpy(std::conj(s), tmp, out);
    };
  }
  return LinearMap(a.dim(), fwd, adj);
}

/// x -> a(b(x))
inline LinearMap compose(const LinearMap& a, const LinearMap& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("compose: dimension mismatch");
  auto fwd = [a, b](std::span<const complex> in, std::span<complex> out) {
    std::vector<complex> tmp(in.size());
    b.apply(in, tmp);
    a.apply(tmp, out);
  };
  LinearMap::Kernel adj;
  if (a.has_adjoint() && b.has_adjoint()) {
    adj = [a, b](std::span<const complex> in, std::span<complex> out) {
      std::vector<complex> tmp(in.size());
      a.apply_adjoint(in, tmp);
      b.apply_adjoint(tmp, out);
    };
  }
  return LinearMap(a.dim(), fwd, adj);
}

/// Pointwise multiplication by a fixed vector.
inline LinearMap diagonal_map(std::vector<complex> diag) {
  auto d = std::make_shared<const std::vector<complex>>(std::move(diag));
  auto fwd = [d](std::span<const complex> in, std::span<complex> out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = (*d)[i] * in[i];
  };
  auto adj = [d](std::span<const complex> in, std::span<complex> out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::conj((*d)[i]) * in[i];
  };
  return LinearMap(d->size(), fwd, adj);
}

}  // namespace usplit
