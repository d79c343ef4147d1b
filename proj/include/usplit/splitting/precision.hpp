#pragma once

#include "usplit/splitting/split_system.hpp"

namespace usplit {

enum class Precision { double_precision, single_precision };

inline Precision precision_from_string(std::string_view s) {
  if (s == "double") return Precision::double_precision;
  if (s == "single") return Precision::single_precision;
  throw ConfigError("unknown precision: " + std::string(s));
}

inline std::string_view to_string(Precision p) { return p == Precision::single_precision ? "single" : "double"; }

inline void round_to_single(std::span<const complex> in, std::span<complex> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = complex(std::complex<float>(in[i]));
}

/// The map with its input and output stored in single precision.
inline LinearMap single_precision_map(const LinearMap& m) {
  auto wrap = [](bool adjoint, LinearMap inner) {
    return [adjoint, inner](std::span<const complex> in, std::span<complex> out) {
      std::vector<complex> t(in.size());
      round_to_single(in, t);
      if (adjoint)
        inner.apply_adjoint(t, out);
      else
        inner.apply(t, out);
      round_to_single(out, out);
    };
  };
  return LinearMap(m.dim(), wrap(false, m), m.has_adjoint() ? LinearMap::Kernel(wrap(true, m)) : LinearMap::Kernel{});
}

/// Emulates single-precision evaluation of the forward problem: every operator of the split
/// and the source are rounded to single precision at their boundaries. Solver vectors and
/// reductions stay in double precision.
inline SplitSystem emulate_single_precision(SplitSystem s) {
  s.L = single_precision_map(s.L);
  s.B = single_precision_map(s.B);
  s.inv_L_plus_I = single_precision_map(s.inv_L_plus_I);
  auto base = s.shifted_inverse;
  s.shifted_inverse = [base](complex sigma) { return single_precision_map(base(sigma)); };
  round_to_single(s.source.span(), s.source.span());
  return s;
}

}  // namespace usplit
