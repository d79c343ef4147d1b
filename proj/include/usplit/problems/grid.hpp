#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "usplit/core/vector.hpp"

namespace usplit {

/// Row-major grid padded by `width` cells on both sides of every axis.
struct PaddedGrid {
  std::vector<std::size_t> inner_shape;
  std::vector<std::size_t> shape;
  std::vector<double> spacing;
  std::size_t width = 0;
  /// For each padded index: the inner index of the nearest interior cell.
  std::vector<std::size_t> nearest;
  /// For each padded index: depth into the padding in [0, 1], 0 inside the interior.
  std::vector<double> depth;
  /// For each inner index: its padded index.
  std::vector<std::size_t> interior;

  std::size_t size() const { return nearest.size(); }
  std::size_t inner_size() const { return interior.size(); }

  std::vector<complex> extend(const std::vector<complex>& inner) const {
    std::vector<complex> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = inner[nearest[i]];
    return out;
  }

  std::vector<complex> embed(const std::vector<complex>& inner) const {
    std::vector<complex> out(size());
    for (std::size_t i = 0; i < inner_size(); ++i) out[interior[i]] = inner[i];
    return out;
  }

  std::vector<complex> crop(std::span<const complex> padded) const {
    std::vector<complex> out(inner_size());
    for (std::size_t i = 0; i < inner_size(); ++i) out[i] = padded[interior[i]];
    return out;
  }
};

inline std::size_t grid_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

inline PaddedGrid make_padded_grid(const std::vector<std::size_t>& shape, const std::vector<double>& spacing,
                                   std::size_t width) {
  if (shape.empty() || spacing.size() != shape.size()) throw InvalidArgument("grid: shape/spacing mismatch");
  for (std::size_t a = 0; a < shape.size(); ++a)
    if (shape[a] == 0 || !(spacing[a] > 0.0)) throw InvalidArgument("grid: extents and spacing must be positive");
  PaddedGrid g;
  g.inner_shape = shape;
  g.spacing = spacing;
  g.width = width;
  for (auto e : shape) g.shape.push_back(e + 2 * width);
  const std::size_t total = grid_size(g.shape);
  g.nearest.resize(total);
  g.depth.assign(total, 0.0);
  g.interior.resize(grid_size(shape));
  const std::size_t rank = shape.size();
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t inner_flat = 0;
    bool inside = true;
    for (std::size_t a = 0; a < rank; ++a) {
      const auto pos = static_cast<std::ptrdiff_t>(idx[a]) - static_cast<std::ptrdiff_t>(width);
      const auto n = static_cast<std::ptrdiff_t>(shape[a]);
      const auto clamped = std::clamp<std::ptrdiff_t>(pos, 0, n - 1);
      if (pos != clamped) {
        inside = false;
        g.depth[flat] = std::max(g.depth[flat], static_cast<double>(std::abs(pos - clamped)) /
                                                    static_cast<double>(width));
      }
      inner_flat = inner_flat * shape[a] + static_cast<std::size_t>(clamped);
    }
    g.nearest[flat] = inner_flat;
    if (inside) g.interior[inner_flat] = flat;
    for (std::size_t a = rank; a-- > 0;) {
      if (++idx[a] < g.shape[a]) break;
      idx[a] = 0;
    }
  }
  return g;
}

}  // namespace usplit
