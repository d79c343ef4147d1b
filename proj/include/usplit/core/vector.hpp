#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "usplit/core/error.hpp"

namespace usplit {

using complex = std::complex<double>;

/// Flat complex state vector with an attached grid shape (row-major, last axis fastest).
class ComplexVector {
 public:
  ComplexVector() = default;

  explicit ComplexVector(std::size_t n) : data_(n), shape_{n} {}

  ComplexVector(std::vector<complex> data, std::vector<std::size_t> shape,
                std::vector<double> spacing = {})
      : data_(std::move(data)), shape_(std::move(shape)), spacing_(std::move(spacing)) {
    check_shape();
  }

  explicit ComplexVector(std::vector<complex> data)
      : data_(std::move(data)), shape_{data_.size()} {}

  static ComplexVector zeros_like(const ComplexVector& other) {
    return ComplexVector(std::vector<complex>(other.size()), other.shape_, other.spacing_);
  }

  std::size_t size() const { return data_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  const std::vector<double>& spacing() const { return spacing_; }

  void set_shape(std::vector<std::size_t> shape, std::vector<double> spacing = {}) {
    shape_ = std::move(shape);
    spacing_ = std::move(spacing);
    check_shape();
  }

  complex& operator[](std::size_t i) { return data_[i]; }
  const complex& operator[](std::size_t i) const { return data_[i]; }

  std::span<complex> span() { return data_; }
  std::span<const complex> span() const { return data_; }
  std::vector<complex>& data() { return data_; }
  const std::vector<complex>& data() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  ComplexVector& operator+=(const ComplexVector& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  ComplexVector& operator-=(const ComplexVector& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  ComplexVector& operator*=(complex s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  friend ComplexVector operator+(ComplexVector a, const ComplexVector& b) { return a += b; }
  friend ComplexVector operator-(ComplexVector a, const ComplexVector& b) { return a -= b; }
  friend ComplexVector operator*(complex s, ComplexVector a) { return a *= s; }
  friend ComplexVector operator*(ComplexVector a, complex s) { return a *= s; }

  bool all_finite() const {
    for (const auto& v : data_)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

 private:
  void check_shape() const {
    std::size_t n = 1;
    for (auto e : shape_) {
      if (e == 0) throw InvalidArgument("ComplexVector: zero extent in shape");
      n *= e;
    }
    if (n != data_.size()) throw InvalidArgument("ComplexVector: shape does not match data length");
  }
  void check_same(const ComplexVector& o) const {
    if (o.size() != size()) throw InvalidArgument("ComplexVector: dimension mismatch");
  }

  std::vector<complex> data_;
  std::vector<std::size_t> shape_;
  std::vector<double> spacing_;
};

/// Inner product, conjugate-linear in the first argument: <x, y> = sum conj(x_i) y_i.
/// Reduction order is sequential so results are bit-reproducible.
inline complex dot(std::span<const complex> x, std::span<const complex> y) {
  if (x.size() != y.size()) throw InvalidArgument("dot: dimension mismatch");
  complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::conj(x[i]) * y[i];
  return acc;
}

inline complex dot(const ComplexVector& x, const ComplexVector& y) { return dot(x.span(), y.span()); }

inline double norm_squared(std::span<const complex> x) {
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(v);
  return acc;
}

inline double norm(std::span<const complex> x) { return std::sqrt(norm_squared(x)); }
inline double norm(const ComplexVector& x) { return norm(x.span()); }

/// y += a * x
inline void axpy(complex a, std::span<const complex> x, std::span<complex> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

/// Vector of i.i.d. standard complex normal entries, deterministic for a given engine state.
inline ComplexVector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<complex> d(n);
  for (auto& v : d) {
    const double re = g(rng);
    const double im = g(rng);
    v = complex(re, im);
  }
  return ComplexVector(std::move(d));
}

inline ComplexVector random_unit_vector(std::size_t n, std::mt19937_64& rng) {
  auto v = random_vector(n, rng);
  v *= 1.0 / norm(v);
  return v;
}

}  // namespace usplit
