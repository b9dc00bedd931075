#pragma once

// Cell-centred densities on uniform 1D/2D grids: construction, image
// ingestion, normalization, midpoint quadrature and 1D CDF helpers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "estip/error.hpp"
#include "estip/format.hpp"
#include "estip/vec.hpp"

namespace estip {

template <int Dim>
struct GridGeometry {
  Vec<Dim> origin{};                   // lower corner of cell 0
  double spacing = 1.0;
  std::array<std::size_t, Dim> shape{};  // cells per axis, x fastest
  bool periodic = false;               // 1D only: unit-period torus

  std::size_t size() const noexcept {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
  }

  double cell_volume() const noexcept { return std::pow(spacing, Dim); }

  Vec<Dim> center(std::size_t linear) const noexcept {
    Vec<Dim> c{};
    for (int a = 0; a < Dim; ++a) {
      const std::size_t i = linear % shape[a];
      linear /= shape[a];
      c[a] = origin[a] + (static_cast<double>(i) + 0.5) * spacing;
    }
    return c;
  }

  /// Upper corner of the last cell.
  Vec<Dim> upper() const noexcept {
    Vec<Dim> u{};
    for (int a = 0; a < Dim; ++a) u[a] = origin[a] + static_cast<double>(shape[a]) * spacing;
    return u;
  }

  bool operator==(const GridGeometry&) const = default;
};

/// Nonnegative cell-centred density. Values are immutable once built.
template <int Dim>
class DensityGrid {
 public:
  DensityGrid() = default;

  DensityGrid(GridGeometry<Dim> geometry, std::vector<double> values)
      : geometry_(geometry), values_(std::move(values)) {
    if (!(geometry_.spacing > 0.0)) throw ConfigError("grid spacing must be positive");
    if (geometry_.periodic && Dim != 1) throw ConfigError("periodic grids are one-dimensional");
    if (values_.size() != geometry_.size())
      throw DatumError(DatumError::Kind::grid_mismatch,
                       "grid has " + std::to_string(geometry_.size()) + " cells but " +
                           std::to_string(values_.size()) + " values were given");
    double sum = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double v = values_[i];
      if (!std::isfinite(v) || v < -1e-12)
        throw DatumError(DatumError::Kind::negative,
                         "density value " + format_double(v) + " at cell " + std::to_string(i) + " is not a nonnegative number");
      sum += v;
    }
    mass_ = sum * geometry_.cell_volume();
  }

  const GridGeometry<Dim>& geometry() const noexcept { return geometry_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }
  double spacing() const noexcept { return geometry_.spacing; }
  double mass() const noexcept { return mass_; }
  Vec<Dim> center(std::size_t i) const noexcept { return geometry_.center(i); }
  double max_value() const noexcept {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
  }

 private:
  GridGeometry<Dim> geometry_{};
  std::vector<double> values_;
  double mass_ = 0.0;
};

using Grid1d = DensityGrid<1>;
using Grid2d = DensityGrid<2>;

template <int Dim>
void require_same_grid(const DensityGrid<Dim>& a, const DensityGrid<Dim>& b, std::string_view what) {
  if (!(a.geometry() == b.geometry()))
    throw DatumError(DatumError::Kind::grid_mismatch, std::string(what) + ": densities live on different grids");
}

template <int Dim>
void require_normalized(const DensityGrid<Dim>& g, std::string_view what, double tol = 1e-9) {
  if (std::abs(g.mass() - 1.0) > tol)
    throw DatumError(DatumError::Kind::unnormalized,
                     std::string(what) + ": density has mass " + format_double(g.mass()) + ", expected 1");
}

template <int Dim>
DensityGrid<Dim> normalize(const DensityGrid<Dim>& g) {
  if (!(g.mass() > 0.0)) throw DatumError(DatumError::Kind::zero_mass, "zero-mass datum");
  const double s = 1.0 / g.mass();
  std::vector<double> v(g.values());
  for (auto& x : v) x *= s;
  return DensityGrid<Dim>(g.geometry(), std::move(v));
}

/// lambda = (1/N) * int w.
template <int Dim>
double lambda_of(const DensityGrid<Dim>& w, std::size_t n) {
  if (n == 0) throw ConfigError("lambda_of: N must be positive");
  return w.mass() / static_cast<double>(n);
}

/// Midpoint rule h^d * sum_c g_c * integrand(x_c).
template <int Dim, class F>
double quadrature(const DensityGrid<Dim>& g, F&& integrand) {
  const double vol = g.geometry().cell_volume();
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] == 0.0) continue;
    s += g[i] * integrand(g.center(i));
  }
  return vol * s;
}

// ---------------------------------------------------------------------------
// 1D grids

struct Extent1d {
  double lo = -0.5;
  double hi = 1.5;
  std::size_t cells = 1024;
};

inline GridGeometry<1> make_geometry_1d(const Extent1d& e, bool periodic = false) {
  if (!(e.hi > e.lo) || e.cells == 0) throw ConfigError("grid extent must satisfy lo < hi with at least one cell");
  if (periodic && std::abs((e.hi - e.lo) - 1.0) > 1e-12) throw ConfigError("periodic grids must have unit length");
  GridGeometry<1> g;
  g.origin = {e.lo};
  g.spacing = (e.hi - e.lo) / static_cast<double>(e.cells);
  g.shape = {e.cells};
  g.periodic = periodic;
  return g;
}

/// Piecewise-constant function `height` on [a, b]; cut cells get the
/// overlapped fraction. Not normalized.
inline Grid1d box_function_1d(double a, double b, double height, const GridGeometry<1>& geom) {
  if (!(a < b)) throw ConfigError("indicator requires a < b");
  const double lo = geom.origin[0];
  const double hi = geom.upper()[0];
  if (a < lo || b > hi)
    throw DatumError(DatumError::Kind::outside_extent, "interval [" + format_double(a) + ", " + format_double(b) +
                                                           "] is outside the grid extent [" + format_double(lo) + ", " +
                                                           format_double(hi) + "]");
  const double h = geom.spacing;
  std::vector<double> v(geom.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double l = lo + static_cast<double>(i) * h;
    const double overlap = std::min(l + h, b) - std::max(l, a);
    if (overlap > 0.0) v[i] = height * overlap / h;
  }
  return Grid1d(geom, std::move(v));
}

/// Normalized indicator 1/(b-a) * chi_[a,b]. On a box grid the boundary
/// cells must stay empty so transported mass never starts at the wall.
inline Grid1d indicator_1d(double a, double b, const GridGeometry<1>& geom) {
  Grid1d g = normalize(box_function_1d(a, b, 1.0 / (b - a), geom));
  if (!geom.periodic && (g[0] != 0.0 || g[g.size() - 1] != 0.0))
    throw DatumError(DatumError::Kind::outside_extent,
                     "interval [" + format_double(a) + ", " + format_double(b) + "] touches the grid boundary; enlarge the box");
  return g;
}

inline Grid1d indicator_1d(double a, double b, const Extent1d& e, bool periodic = false) {
  return indicator_1d(a, b, make_geometry_1d(e, periodic));
}

/// Face values of the cumulative mass: W[0] = 0, W[j] = h * sum_{c<j} g_c.
inline std::vector<double> cumulative_1d(const Grid1d& g) {
  std::vector<double> cdf(g.size() + 1, 0.0);
  const double h = g.spacing();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    acc += g[i];
    cdf[i + 1] = h * acc;
  }
  return cdf;
}

inline double face_position(const Grid1d& g, std::size_t j) {
  return g.geometry().origin[0] + static_cast<double>(j) * g.spacing();
}

/// Inverse of the piecewise-linear CDF at level q in (0, mass].
inline double inverse_cdf_1d(const Grid1d& g, const std::vector<double>& cdf, double q) {
  const auto it = std::lower_bound(cdf.begin() + 1, cdf.end(), q);
  if (it == cdf.end()) return face_position(g, g.size());
  const auto j1 = static_cast<std::size_t>(it - cdf.begin());
  const std::size_t j = j1 - 1;
  const double lo = cdf[j];
  const double hi = cdf[j1];
  const double frac = hi > lo ? (q - lo) / (hi - lo) : 0.0;
  return face_position(g, j) + std::clamp(frac, 0.0, 1.0) * g.spacing();
}

inline double mean_1d(const Grid1d& g) {
  return quadrature(g, [](const Vec<1>& x) { return x[0]; }) / g.mass();
}

/// Support [first, last] cell extent where values exceed `threshold`.
inline std::pair<double, double> support_1d(const Grid1d& g, double threshold) {
  std::size_t first = g.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] > threshold) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first == g.size()) return {0.0, 0.0};
  return {face_position(g, first), face_position(g, last + 1)};
}

inline double l1_distance(const Grid1d& a, const Grid1d& b) {
  require_same_grid(a, b, "l1_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * a.spacing();
}

// ---------------------------------------------------------------------------
// PGM images

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned maxval = 255;
  std::vector<unsigned> pixels;  // row-major, row 0 at the top
};

namespace detail {

inline void skip_pgm_space(std::string_view s, std::size_t& pos) {
  for (;;) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos < s.size() && s[pos] == '#') {
      while (pos < s.size() && s[pos] != '\n') ++pos;
      continue;
    }
    return;
  }
}

inline unsigned read_pgm_uint(std::string_view s, std::size_t& pos, const char* what) {
  skip_pgm_space(s, pos);
  const std::size_t start = pos;
  unsigned long v = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    v = v * 10 + static_cast<unsigned>(s[pos] - '0');
    if (v > 1u << 30) break;
    ++pos;
  }
  if (pos == start) throw DatumError(DatumError::Kind::bad_format, std::string("PGM: expected ") + what);
  return static_cast<unsigned>(v);
}

}  // namespace detail

inline GrayImage parse_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw DatumError(DatumError::Kind::bad_format, "not a PGM file (expected magic P2 or P5)");
  const bool binary = bytes[1] == '5';
  std::size_t pos = 2;
  GrayImage img;
  img.width = detail::read_pgm_uint(bytes, pos, "width");
  img.height = detail::read_pgm_uint(bytes, pos, "height");
  img.maxval = detail::read_pgm_uint(bytes, pos, "maxval");
  if (img.width == 0 || img.height == 0) throw DatumError(DatumError::Kind::bad_format, "PGM: empty image");
  if (img.maxval == 0 || img.maxval > 65535) throw DatumError(DatumError::Kind::bad_format, "PGM: maxval out of range");
  const std::size_t n = img.width * img.height;
  img.pixels.resize(n);
  if (binary) {
    ++pos;  // exactly one whitespace byte after maxval
    const std::size_t bpp = img.maxval > 255 ? 2 : 1;
    if (bytes.size() < pos + n * bpp) throw DatumError(DatumError::Kind::bad_format, "PGM: truncated pixel data");
    for (std::size_t i = 0; i < n; ++i) {
      const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos + i * bpp);
      img.pixels[i] = bpp == 2 ? (static_cast<unsigned>(p[0]) << 8) | p[1] : p[0];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) img.pixels[i] = detail::read_pgm_uint(bytes, pos, "pixel value");
  }
  for (auto v : img.pixels)
    if (v > img.maxval) throw DatumError(DatumError::Kind::bad_format, "PGM: pixel value exceeds maxval");
  return img;
}

/// Darkness (maxval - g) as a normalized density on [0, W/s] x [0, H/s],
/// s = max(W, H); x runs along columns, y along rows (downwards).
inline Grid2d image_to_density(const GrayImage& img) {
  GridGeometry<2> geom;
  geom.origin = {0.0, 0.0};
  geom.spacing = 1.0 / static_cast<double>(std::max(img.width, img.height));
  geom.shape = {img.width, img.height};
  std::vector<double> v(img.pixels.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(img.maxval - img.pixels[i]);
  Grid2d raw(geom, std::move(v));
  if (!(raw.mass() > 0.0)) throw DatumError(DatumError::Kind::zero_mass, "zero-mass datum (blank white image)");
  return normalize(raw);
}

inline Grid2d load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatumError(DatumError::Kind::unreadable, "cannot read image file '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return image_to_density(parse_pgm(bytes));
}

/// Sum 2^levels x 2^levels pixel blocks (trailing partial blocks included).
inline Grid2d coarsen(const Grid2d& g, int levels) {
  if (levels <= 0) return g;
  const std::size_t f = std::size_t{1} << levels;
  const auto& geo = g.geometry();
  GridGeometry<2> out = geo;
  out.spacing = geo.spacing * static_cast<double>(f);
  out.shape = {(geo.shape[0] + f - 1) / f, (geo.shape[1] + f - 1) / f};
  std::vector<double> v(out.size(), 0.0);
  for (std::size_t iy = 0; iy < geo.shape[1]; ++iy)
    for (std::size_t ix = 0; ix < geo.shape[0]; ++ix)
      v[(ix / f) + out.shape[0] * (iy / f)] += g[ix + geo.shape[0] * iy];
  const double scale = 1.0 / static_cast<double>(f * f);
  for (auto& x : v) x *= scale;
  return normalize(Grid2d(out, std::move(v)));
}

}  // namespace estip
