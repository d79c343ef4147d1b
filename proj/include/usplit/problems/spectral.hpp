#pragma once

#include <fftw3.h>

#include <memory>
#include <mutex>
#include <numbers>

#include "usplit/core/linear_map.hpp"

namespace usplit {

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// In-place n-dimensional complex FFT over a row-major grid (last axis fastest).
/// Plans are shared and executed through the new-array interface, so one FftPlan may
/// be used from several threads.
class FftPlan {
 public:
  explicit FftPlan(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    if (shape_.empty()) throw InvalidArgument("FftPlan: empty shape");
    size_ = 1;
    std::vector<int> dims;
    for (auto e : shape_) {
      if (e == 0) throw InvalidArgument("FftPlan: zero extent");
      size_ *= e;
      dims.push_back(static_cast<int>(e));
    }
    std::vector<complex> scratch(size_);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard lock(detail::fftw_planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd_ = make(fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf, FFTW_FORWARD, flags));
    bwd_ = make(fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf, FFTW_BACKWARD, flags));
  }

  std::size_t size() const { return size_; }
  const std::vector<std::size_t>& shape() const { return shape_; }

  void forward(std::span<complex> x) const { run(*fwd_, x); }

  /// Inverse transform including the 1/N normalisation.
  void inverse(std::span<complex> x) const {
    run(*bwd_, x);
    const double s = 1.0 / static_cast<double>(size_);
    for (auto& v : x) v *= s;
  }

 private:
  using Plan = std::shared_ptr<std::remove_pointer_t<fftw_plan>>;

  static Plan make(fftw_plan p) {
    if (!p) throw Error("FftPlan: FFTW planning failed");
    return Plan(p, [](fftw_plan q) {
      std::lock_guard lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(q);
    });
  }

  void run(std::remove_pointer_t<fftw_plan>& plan, std::span<complex> x) const {
    if (x.size() != size_) throw InvalidArgument("FftPlan: size mismatch");
    auto* buf = reinterpret_cast<fftw_complex*>(x.data());
    fftw_execute_dft(&plan, buf, buf);
  }

  std::vector<std::size_t> shape_;
  std::size_t size_ = 0;
  Plan fwd_, bwd_;
};

/// Angular wavenumbers of an n-point axis with step h, in FFT order.
inline std::vector<double> wavenumbers(std::size_t n, double h) {
  std::vector<double> p(n);
  const double dp = 2.0 * std::numbers::pi / (static_cast<double>(n) * h);
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<double>(j);
    p[j] = (2 * j < n ? jj : jj - static_cast<double>(n)) * dp;
  }
  return p;
}

/// |p|^2 for every mode of a row-major grid.
inline std::vector<double> squared_wavenumbers(const std::vector<std::size_t>& shape,
                                               const std::vector<double>& spacing) {
  if (spacing.size() != shape.size()) throw InvalidArgument("squared_wavenumbers: spacing rank mismatch");
  std::size_t total = 1;
  for (auto e : shape) total *= e;
  std::vector<double> out(total, 0.0);
  std::size_t stride = total;
  for (std::size_t ax = 0; ax < shape.size(); ++ax) {
    const auto p = wavenumbers(shape[ax], spacing[ax]);
    stride /= shape[ax];
    for (std::size_t i = 0; i < total; ++i) {
      const double v = p[(i / stride) % shape[ax]];
      out[i] += v * v;
    }
  }
  return out;
}

/// Diagonal operator in Fourier space: x -> F^{-1} diag(symbol) F x. The adjoint uses conj(symbol).
inline LinearMap fourier_multiplier(const FftPlan& plan, std::vector<complex> symbol) {
  if (symbol.size() != plan.size()) throw InvalidArgument("fourier_multiplier: symbol size mismatch");
  auto sym = std::make_shared<const std::vector<complex>>(std::move(symbol));
  auto make = [plan, sym](bool conj) {
    return [plan, sym, conj](std::span<const complex> in, std::span<complex> out) {
      std::copy(in.begin(), in.end(), out.begin());
      plan.forward(out);
      const auto& s = *sym;
      if (conj) {
        for (std::size_t i = 0; i < s.size(); ++i) out[i] *= std::conj(s[i]);
      } else {
        for (std::size_t i = 0; i < s.size(); ++i) out[i] *= s[i];
      }
      plan.inverse(out);
    };
  };
  return LinearMap(plan.size(), make(false), make(true));
}

}  // namespace usplit
