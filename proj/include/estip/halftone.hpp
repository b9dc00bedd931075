#pragma once

// Image stippling: particle flow on a 2D image density, dot rasterization and
// a block-count diagnostic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "estip/datum.hpp"
#include "estip/error.hpp"
#include "estip/kernels.hpp"
#include "estip/particles.hpp"

namespace estip {

/// Steady (or max_steps) positions of N particles started from i.i.d. draws
/// of the image density. `coarsen_levels` > 0 first sums 2^k x 2^k blocks.
inline FlowResult<2> halftone_image(const Grid2d& img, std::size_t n, const Kernel& phi, const Kernel& psi,
                                    const FlowConfig& cfg, int coarsen_levels = 0) {
  require_normalized(img, "halftone image");
  if (n == 0) throw ConfigError("number of particles must be positive");
  const Grid2d w = coarsen(img, coarsen_levels);
  Box<2> box{w.geometry().origin, w.geometry().upper()};
  const auto s0 = init_positions<2>(n, InitKind::from_w_sampling, cfg.seed, box, &w);
  return evolve_to_steady<2>(s0, w, phi, psi, cfg);
}

struct CanvasConfig {
  std::size_t width = 256;
  std::size_t height = 256;
  double dot_radius = 1.5;  // pixels
  Vec<2> origin{0.0, 0.0};  // position of the top-left canvas corner
  double extent = 1.0;      // position units covered by max(width, height) pixels
};

/// Binary P5 image: black discs on white. A pixel is black when its centre
/// lies within dot_radius of some dot.
inline std::vector<std::uint8_t> render_dots(const std::vector<Vec<2>>& dots, const CanvasConfig& canvas) {
  if (canvas.width == 0 || canvas.height == 0) throw ConfigError("canvas must have positive size");
  const double px_per_unit = static_cast<double>(std::max(canvas.width, canvas.height)) / canvas.extent;
  std::vector<std::size_t> outside;
  std::vector<std::uint8_t> raster(canvas.width * canvas.height, 255);
  for (std::size_t i = 0; i < dots.size(); ++i) {
    const double cx = (dots[i][0] - canvas.origin[0]) * px_per_unit;
    const double cy = (dots[i][1] - canvas.origin[1]) * px_per_unit;
    if (!(cx >= 0.0 && cy >= 0.0 && cx <= static_cast<double>(canvas.width) && cy <= static_cast<double>(canvas.height))) {
      outside.push_back(i);
      continue;
    }
    const double r = canvas.dot_radius;
    const auto x0 = static_cast<long>(std::floor(cx - r)), x1 = static_cast<long>(std::ceil(cx + r));
    const auto y0 = static_cast<long>(std::floor(cy - r)), y1 = static_cast<long>(std::ceil(cy + r));
    for (long y = std::max(y0, 0L); y <= std::min(y1, static_cast<long>(canvas.height) - 1); ++y)
      for (long x = std::max(x0, 0L); x <= std::min(x1, static_cast<long>(canvas.width) - 1); ++x) {
        const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        if (dx * dx + dy * dy <= r * r) raster[static_cast<std::size_t>(y) * canvas.width + static_cast<std::size_t>(x)] = 0;
      }
  }
  if (!outside.empty()) {
    std::string list;
    for (std::size_t k = 0; k < outside.size() && k < 20; ++k) list += (k ? "," : "") + std::to_string(outside[k]);
    if (outside.size() > 20) list += ",...";
    throw DatumError(DatumError::Kind::outside_extent,
                     std::to_string(outside.size()) + " dot(s) outside the canvas: indices " + list);
  }
  std::string header = "P5\n" + std::to_string(canvas.width) + " " + std::to_string(canvas.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), raster.begin(), raster.end());
  return out;
}

/// Canvas over the image box widened by `margin` (fraction of the longer
/// side) on every edge; boundary dots of a steady state may sit slightly
/// outside the image itself.
inline CanvasConfig canvas_for(const GridGeometry<2>& geo, std::size_t longer_side, double margin = 0.05) {
  if (longer_side == 0) throw ConfigError("canvas must have positive size");
  if (!(margin >= 0.0)) throw ConfigError("canvas margin must be non-negative");
  const double wx = geo.spacing * static_cast<double>(geo.shape[0]);
  const double wy = geo.spacing * static_cast<double>(geo.shape[1]);
  const double pad = margin * std::max(wx, wy);
  const double ex = wx + 2.0 * pad, ey = wy + 2.0 * pad;
  CanvasConfig c;
  c.extent = std::max(ex, ey);
  const double px = static_cast<double>(longer_side) / c.extent;
  c.width = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(ex * px)));
  c.height = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(ey * px)));
  c.origin = {geo.origin[0] - pad, geo.origin[1] - pad};
  return c;
}

struct BlockReport {
  std::size_t blocks_per_axis = 0;
  std::vector<std::size_t> counts;  // row-major, block row 0 at the top
  std::vector<double> mass;         // datum mass per block
  std::vector<double> discrepancy;  // |count/N - mass|
  double max_discrepancy = 0.0;
  double chi2 = 0.0;                // sum (count - N mass)^2 / (N mass) over blocks with mass
  bool degenerate = false;          // k^2 > N/10
};

inline BlockReport density_consistency(const std::vector<Vec<2>>& p, const Grid2d& w, std::size_t k) {
  if (k == 0) throw ConfigError("density_consistency: at least one block per axis");
  const auto& geo = w.geometry();
  const Vec<2> lo = geo.origin, hi = geo.upper();
  BlockReport rep;
  rep.blocks_per_axis = k;
  rep.counts.assign(k * k, 0);
  rep.mass.assign(k * k, 0.0);
  rep.discrepancy.assign(k * k, 0.0);
  const double n = static_cast<double>(p.size());
  rep.degenerate = static_cast<double>(k * k) > n / 10.0;
  auto block_of = [&](const Vec<2>& x) {
    std::size_t idx[2];
    for (int a = 0; a < 2; ++a) {
      const double u = (x[a] - lo[a]) / (hi[a] - lo[a]) * static_cast<double>(k);
      idx[a] = static_cast<std::size_t>(std::clamp(u, 0.0, static_cast<double>(k) - 0.5));
    }
    return idx[0] + k * idx[1];
  };
  for (const auto& x : p) ++rep.counts[block_of(x)];
  const double vol = geo.cell_volume();
  for (std::size_t i = 0; i < w.size(); ++i) rep.mass[block_of(w.center(i))] += vol * w[i];
  for (std::size_t b = 0; b < k * k; ++b) {
    const double share = n > 0.0 ? static_cast<double>(rep.counts[b]) / n : 0.0;
    rep.discrepancy[b] = std::abs(share - rep.mass[b]);
    rep.max_discrepancy = std::max(rep.max_discrepancy, rep.discrepancy[b]);
    if (rep.mass[b] > 0.0 && n > 0.0) {
      const double expected = n * rep.mass[b];
      const double d = static_cast<double>(rep.counts[b]) - expected;
      rep.chi2 += d * d / expected;
    }
  }
  return rep;
}

/// Synthetic 8-bit test images.
inline GrayImage two_tone_image(std::size_t size = 64) {
  GrayImage img;
  img.width = img.height = size;
  img.pixels.resize(size * size);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) img.pixels[y * size + x] = x < size / 2 ? 85u : 170u;
  return img;
}

inline GrayImage gradient_image(std::size_t size = 64) {
  GrayImage img;
  img.width = img.height = size;
  img.pixels.resize(size * size);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x)
      img.pixels[y * size + x] = static_cast<unsigned>(std::lround(255.0 * static_cast<double>(x) / static_cast<double>(size)));
  return img;
}

inline GrayImage rotate90(const GrayImage& img) {
  GrayImage out;
  out.width = img.height;
  out.height = img.width;
  out.maxval = img.maxval;
  out.pixels.resize(img.pixels.size());
  // (x, y) -> (H - 1 - y, x): clockwise in image coordinates.
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      out.pixels[x * out.width + (img.height - 1 - y)] = img.pixels[y * img.width + x];
  return out;
}

}  // namespace estip
