#pragma once

#include <bit>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>

#include "usplit/problems/diffusion.hpp"
#include "usplit/problems/helmholtz.hpp"
#include "usplit/problems/pantograph.hpp"
#include "usplit/problems/schrodinger.hpp"

namespace usplit {

using json = nlohmann::json;

/// A problem configuration turned into a canonical split system.
struct LoadedProblem {
  std::string name;
  std::string kind;
  SplitSystem split;
};

namespace config {

inline ConfigError error(const std::string& where, const std::string& what) {
  return ConfigError(where + ": " + what);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw error(where, "expected a number");
  return j.get<double>();
}

/// number, or {"re": x, "im": y}
inline complex scalar(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_object() && j.contains("re")) return {number(j.at("re"), where), j.contains("im") ? number(j.at("im"), where) : 0.0};
  throw error(where, "expected a number or {\"re\", \"im\"}");
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline double number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

inline const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw error(where, "missing key \"" + key + "\"");
  return j.at(key);
}

/// Little-endian float64 (re, im) pairs.
inline std::vector<complex> read_sidecar(const std::filesystem::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open sidecar file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != 16 * count)
    throw ConfigError("sidecar " + path.string() + ": expected " + std::to_string(count) + " complex values");
  std::vector<complex> out(count);
  for (std::size_t i = 0; i < 2 * count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[8 * i + static_cast<std::size_t>(b)];
    const double v = std::bit_cast<double>(bits);
    if (i % 2 == 0)
      out[i / 2].real(v);
    else
      out[i / 2].imag(v);
  }
  return out;
}

inline void write_sidecar(const std::filesystem::path& path, const std::vector<complex>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write sidecar file " + path.string());
  for (const auto& z : values)
    for (double v : {z.real(), z.imag()}) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      for (int b = 0; b < 8; ++b) {
        out.put(static_cast<char>(bits & 0xff));
        bits >>= 8;
      }
    }
}

/// Cell-centre coordinates relative to the grid centre.
struct Grid {
  std::vector<std::size_t> shape;
  std::vector<double> spacing;

  std::size_t size() const { return grid_size(shape); }

  std::vector<double> coords(std::size_t flat) const {
    std::vector<double> x(shape.size());
    for (std::size_t a = shape.size(); a-- > 0;) {
      const std::size_t i = flat % shape[a];
      flat /= shape[a];
      x[a] = (static_cast<double>(i) + 0.5 - 0.5 * static_cast<double>(shape[a])) * spacing[a];
    }
    return x;
  }

  double cell_volume() const {
    double v = 1.0;
    for (double h : spacing) v *= h;
    return v;
  }
};

inline std::vector<double> vec(const json& j, std::size_t dim, const std::string& where) {
  if (!j.is_array() || j.size() != dim) throw error(where, "expected " + std::to_string(dim) + " coordinates");
  std::vector<double> v;
  for (const auto& e : j) v.push_back(number(e, where));
  return v;
}

/// Membership test of a parametric shape.
inline std::function<bool(const std::vector<double>&)> shape_predicate(const json& s, const Grid& g,
                                                                      const std::string& where) {
  const std::string type = require(s, "type", where).get<std::string>();
  const std::size_t d = g.shape.size();
  if (type == "box") {
    const auto lo = vec(require(s, "min", where), d, where), hi = vec(require(s, "max", where), d, where);
    return [lo, hi](const std::vector<double>& x) {
      for (std::size_t a = 0; a < x.size(); ++a)
        if (x[a] < lo[a] || x[a] > hi[a]) return false;
      return true;
    };
  }
  if (type == "disk" || type == "annulus") {
    const auto c = vec(require(s, "center", where), d, where);
    const double r_in = type == "disk" ? -1.0 : number(require(s, "r_in", where), where);
    const double r_out = number(require(s, type == "disk" ? "radius" : "r_out", where), where);
    return [c, r_in, r_out](const std::vector<double>& x) {
      double r2 = 0.0;
      for (std::size_t a = 0; a < x.size(); ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
      const double r = std::sqrt(r2);
      return r >= r_in && r <= r_out;
    };
  }
  if (type == "point") {
    const auto at = vec(require(s, "at", where), d, where);
    return [at, h = g.spacing](const std::vector<double>& x) {
      for (std::size_t a = 0; a < x.size(); ++a)
        if (x[a] - 0.5 * h[a] > at[a] || x[a] + 0.5 * h[a] <= at[a]) return false;
      return true;
    };
  }
  throw error(where, "unknown shape type \"" + type + "\"");
}

/// Scalar field: number | {"re","im"} | inline array | {"sidecar": file} |
/// {"background": v, "shapes": [{type, ..., value}]}. Later shapes override earlier ones.
inline std::vector<complex> field(const json& j, const Grid& g, const std::filesystem::path& base,
                                  const std::string& where) {
  const std::size_t n = g.size();
  if (j.is_number() || (j.is_object() && j.contains("re"))) return std::vector<complex>(n, scalar(j, where));
  if (j.is_array()) {
    if (j.size() != n) throw error(where, "inline field has " + std::to_string(j.size()) + " values, grid has " +
                                              std::to_string(n));
    std::vector<complex> out;
    out.reserve(n);
    for (const auto& e : j) out.push_back(scalar(e, where));
    return out;
  }
  if (j.is_object() && j.contains("sidecar")) return read_sidecar(base / j.at("sidecar").get<std::string>(), n);
  if (j.is_object() && j.contains("background")) {
    std::vector<complex> out(n, scalar(j.at("background"), where + ".background"));
    if (j.contains("shapes")) {
      for (const auto& s : j.at("shapes")) {
        const auto inside = shape_predicate(s, g, where);
        const complex v = scalar(require(s, "value", where), where);
        for (std::size_t i = 0; i < n; ++i)
          if (inside(g.coords(i))) out[i] = v;
      }
    }
    return out;
  }
  throw error(where, "unrecognised field description");
}

/// Tensor field (N d x d, row-major per point): a scalar field gives isotropic tensors;
/// shapes may instead carry "matrix" or, in 2-D, "tangential"/"radial" about their centre.
inline std::vector<complex> tensor_field(const json& j, const Grid& g, const std::filesystem::path& base,
                                         const std::string& where) {
  const std::size_t n = g.size(), d = g.shape.size();
  std::vector<complex> out(n * d * d);
  auto set_iso = [&](std::size_t p, complex v) {
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) out[p * d * d + a * d + b] = a == b ? v : complex{};
  };
  if (j.is_object() && j.contains("tensor_sidecar")) return read_sidecar(base / j.at("tensor_sidecar").get<std::string>(), n * d * d);
  if (!(j.is_object() && j.contains("background"))) {
    const auto iso = field(j, g, base, where);
    for (std::size_t p = 0; p < n; ++p) set_iso(p, iso[p]);
    return out;
  }
  const complex bg = scalar(j.at("background"), where + ".background");
  for (std::size_t p = 0; p < n; ++p) set_iso(p, bg);
  if (!j.contains("shapes")) return out;
  for (const auto& s : j.at("shapes")) {
    const auto inside = shape_predicate(s, g, where);
    for (std::size_t p = 0; p < n; ++p) {
      const auto x = g.coords(p);
      if (!inside(x)) continue;
      if (s.contains("value")) {
        set_iso(p, scalar(s.at("value"), where));
      } else if (s.contains("matrix")) {
        const auto& m = s.at("matrix");
        for (std::size_t a = 0; a < d; ++a)
          for (std::size_t b = 0; b < d; ++b) out[p * d * d + a * d + b] = scalar(m.at(a).at(b), where);
      } else if (s.contains("tangential") && d == 2) {
        const auto c = vec(require(s, "center", where), d, where);
        const complex t = scalar(s.at("tangential"), where), r = scalar(require(s, "radial", where), where);
        double ux = x[0] - c[0], uy = x[1] - c[1];
        const double len = std::hypot(ux, uy);
        if (len > 0.0) {
          ux /= len;
          uy /= len;
        } else {
          ux = 1.0;
          uy = 0.0;
        }
        // r uu^T + t vv^T with u radial, v tangential
        out[p * 4 + 0] = r * ux * ux + t * uy * uy;
        out[p * 4 + 1] = (r - t) * ux * uy;
        out[p * 4 + 2] = (r - t) * ux * uy;
        out[p * 4 + 3] = r * uy * uy + t * ux * ux;
      } else {
        throw error(where, "tensor shape needs \"value\", \"matrix\" or \"tangential\"/\"radial\"");
      }
    }
  }
  return out;
}

/// Function of time: number | {"re","im"} | {"background": v, "intervals": [{from, to, value}]}
/// | {"type": "gaussian", "center": t, "rate": r, "amplitude": a}.
inline std::function<complex(double)> time_function(const json& j, const std::string& where) {
  if (j.is_number() || (j.is_object() && j.contains("re"))) {
    const complex v = scalar(j, where);
    return [v](double) { return v; };
  }
  if (j.is_object() && j.contains("background")) {
    struct Piece {
      double from, to;
      complex value;
    };
    const complex bg = scalar(j.at("background"), where);
    std::vector<Piece> pieces;
    for (const auto& p : j.value("intervals", json::array())) {
      const double from = number_or(p, "from", -std::numeric_limits<double>::infinity(), where);
      const double to = number_or(p, "to", std::numeric_limits<double>::infinity(), where);
      pieces.push_back({from, to, scalar(require(p, "value", where), where)});
    }
    return [bg, pieces](double t) {
      complex v = bg;
      for (const auto& p : pieces)
        if (t >= p.from && t <= p.to) v = p.value;
      return v;
    };
  }
  if (j.is_object() && j.value("type", "") == "gaussian") {
    const double c = number(require(j, "center", where), where), r = number(require(j, "rate", where), where);
    const complex a = j.contains("amplitude") ? scalar(j.at("amplitude"), where) : complex(1.0);
    return [c, r, a](double t) { return a * std::exp(-r * (t - c) * (t - c)); };
  }
  throw error(where, "unrecognised time function");
}

inline Grid grid(const json& j, const std::string& where, std::size_t expected_dim, double default_spacing = 1.0) {
  Grid g;
  for (const auto& e : require(j, "shape", where)) g.shape.push_back(e.get<std::size_t>());
  if (expected_dim && g.shape.size() != expected_dim)
    throw error(where, "shape must have " + std::to_string(expected_dim) + " entries");
  if (j.contains("spacing")) {
    const auto& s = j.at("spacing");
    if (s.is_number())
      g.spacing.assign(g.shape.size(), s.get<double>());
    else
      g.spacing = vec(s, g.shape.size(), where + ".spacing");
  } else {
    g.spacing.assign(g.shape.size(), default_spacing);
  }
  for (std::size_t a = 0; a < g.shape.size(); ++a)
    if (g.shape[a] == 0 || !(g.spacing[a] > 0.0)) throw error(where, "grid extents and spacing must be positive");
  return g;
}

inline LoadedProblem helmholtz(const json& j, const std::filesystem::path& base, std::size_t dim) {
  const std::string w = "helmholtz";
  const double wavelength = number_or(j, "wavelength", 1.0, w);
  const double k0 = 2.0 * std::numbers::pi / wavelength;
  // Default spacing: points_per_wavelength samples per shortest wavelength.
  double max_index = 1.0;
  json index_json = j.contains("refractive_index") ? j.at("refractive_index") : json(1.0);
  Grid probe;
  probe.shape.assign(dim, 1);
  probe.spacing.assign(dim, 1.0);
  double h = 1.0;
  if (!j.contains("spacing")) {
    // Evaluate the index on a trial grid only to find its maximum real part.
    const double ppw = number_or(j, "points_per_wavelength", 4.0, w);
    Grid trial = grid(j, w, dim, wavelength / ppw);
    for (auto v : field(index_json, trial, base, w + ".refractive_index")) max_index = std::max(max_index, v.real());
    h = wavelength / (ppw * max_index);
  }
  const Grid g = grid(j, w, dim, h);

  HelmholtzSpec s;
  s.shape = g.shape;
  s.spacing = g.spacing;
  if (j.contains("k2")) {
    s.k2 = field(j.at("k2"), g, base, w + ".k2");
  } else {
    const auto n = field(index_json, g, base, w + ".refractive_index");
    s.k2.resize(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) s.k2[i] = k0 * k0 * n[i] * n[i];
  }
  s.source = field(require(j, "source", w), g, base, w + ".source");
  s.absorber_width = get_or<std::size_t>(j, "absorber_width", 16);
  // Absorber strength is given relative to k0^2.
  s.absorber_strength = number_or(j, "absorber_strength", 0.0, w) * k0 * k0;
  s.complex_bias = get_or<bool>(j, "complex_bias", true);
  return {"", dim == 1 ? "helmholtz1d" : "helmholtz2d",
          build_helmholtz_split(s, number_or(j, "target_norm", kDefaultTargetNorm, w),
                                number_or(j, "alpha", kDefaultAlpha, w))};
}

inline LoadedProblem diffusion(const json& j, const std::filesystem::path& base) {
  const std::string w = "diffusion";
  const Grid g = grid(j, w, 0);
  DiffusionSpec s;
  s.shape = g.shape;
  s.spacing = g.spacing;
  s.D = tensor_field(require(j, "D", w), g, base, w + ".D");
  s.a = field(require(j, "a", w), g, base, w + ".a");
  s.source = field(require(j, "source", w), g, base, w + ".source");
  s.absorber_width = get_or<std::size_t>(j, "absorber_width", 0);
  s.absorber_strength = number_or(j, "absorber_strength", 0.0, w);
  return {"", "diffusion",
          build_diffusion_split(s, number_or(j, "target_norm", kDefaultTargetNorm, w),
                                number_or(j, "alpha", kDefaultAlpha, w))};
}

inline LoadedProblem pantograph(const json& j) {
  const std::string w = "pantograph";
  PantographSpec s;
  s.lambda = number(require(j, "lambda", w), w + ".lambda");
  s.t0 = number(require(j, "t0", w), w + ".t0");
  s.t_end = number(require(j, "t_end", w), w + ".t_end");
  s.dt = number_or(j, "dt", 0.01, w);
  s.a = time_function(require(j, "a", w), w + ".a");
  s.b = time_function(require(j, "b", w), w + ".b");
  s.x0 = time_function(require(j, "x0", w), w + ".x0");
  return {"", "pantograph",
          build_pantograph_split(s, number_or(j, "target_norm", kDefaultTargetNorm, w),
                                 get_or<bool>(j, "antisymmetrize", false), number_or(j, "alpha", kDefaultAlpha, w))};
}

inline LoadedProblem schrodinger(const json& j, const std::filesystem::path& base) {
  const std::string w = "schrodinger";
  const Grid g = grid(j, w, 0);
  SchrodingerSpec s;
  s.shape = g.shape;
  s.spacing = g.spacing;
  for (auto v : field(require(j, "potential", w), g, base, w + ".potential")) {
    if (v.imag() != 0.0) throw error(w, "potential must be real");
    s.potential.push_back(v.real());
  }
  s.shift = number_or(j, "shift", 0.0, w);
  if (j.contains("source")) s.source = field(j.at("source"), g, base, w + ".source");
  return {"", "schrodinger",
          build_schrodinger_split(s, number_or(j, "target_norm", kDefaultTargetNorm, w),
                                  number_or(j, "alpha", kDefaultAlpha, w))};
}

}  // namespace config

/// Build a problem from a parsed configuration; relative sidecar paths resolve against `base`.
inline LoadedProblem load_problem(const json& j, const std::filesystem::path& base = ".") {
  if (!j.is_object()) throw ConfigError("problem config must be a JSON object");
  const std::string kind = config::require(j, "problem", "config").get<std::string>();
  LoadedProblem p;
  try {
    if (kind == "helmholtz1d")
      p = config::helmholtz(j, base, 1);
    else if (kind == "helmholtz2d")
      p = config::helmholtz(j, base, 2);
    else if (kind == "diffusion")
      p = config::diffusion(j, base);
    else if (kind == "pantograph")
      p = config::pantograph(j);
    else if (kind == "schrodinger")
      p = config::schrodinger(j, base);
    else
      throw ConfigError("unknown problem kind \"" + kind + "\"");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed ") + kind + " config: " + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid ") + kind + " problem: " + e.what());
  }
  p.name = j.value("name", kind);
  return p;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline LoadedProblem load_problem_file(const std::filesystem::path& path) {
  return load_problem(read_json_file(path), path.parent_path());
}

}  // namespace usplit
