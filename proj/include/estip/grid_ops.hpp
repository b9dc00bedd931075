#pragma once

#include <cstddef>
#include <vector>

#include "estip/convolve.hpp"
#include "estip/datum.hpp"
#include "estip/kernels.hpp"

namespace estip {

enum class Stagger { faces, centers };

/// out_j = h * sum_c g_c k(y_j - x_c) on a 1D grid, where k is phi or phi'
/// and y_j are cell faces (M + 1 on a box, M on the torus with face j the
/// left edge of cell j) or cell centres.
class GridKernelOp {
 public:
  GridKernelOp(const Kernel& k, const GridGeometry<1>& geom, Stagger where, bool gradient)
      : h_(geom.spacing), conv_(make(k, geom, where, gradient)) {
    if (k.periodic() != geom.periodic)
      throw ConfigError("kernel " + k.spec() + " and grid disagree about periodicity");
  }

  std::vector<double> apply(const std::vector<double>& g) {
    auto out = conv_.apply(g);
    for (auto& v : out) v *= h_;
    return out;
  }

  std::vector<double> apply_direct(const std::vector<double>& g) const {
    auto out = conv_.apply_direct(g);
    for (auto& v : out) v *= h_;
    return out;
  }

  std::size_t outputs() const noexcept { return conv_.outputs(); }

 private:
  static Convolver1d make(const Kernel& k, const GridGeometry<1>& geom, Stagger where, bool gradient) {
    const std::size_t m = geom.shape[0];
    const double h = geom.spacing;
    const double shift = where == Stagger::faces ? -0.5 : 0.0;
    auto sample = [&](std::ptrdiff_t lag) {
      const double d = (static_cast<double>(lag) + shift) * h;
      return gradient ? k.grad1(d) : k.eval1(d);
    };
    const auto mm = static_cast<std::ptrdiff_t>(m);
    if (geom.periodic) {
      std::vector<double> table(m);
      for (std::ptrdiff_t t = 0; t < mm; ++t) table[t] = sample(t);
      return Convolver1d(std::move(table), m, m, 0, true);
    }
    // Lags y_j - x_c span [-(M-1), M] for faces and [-(M-1), M-1] for centres.
    const std::ptrdiff_t hi = where == Stagger::faces ? mm : mm - 1;
    std::vector<double> table(static_cast<std::size_t>(hi + mm));
    for (std::ptrdiff_t lag = -(mm - 1); lag <= hi; ++lag) table[lag + mm - 1] = sample(lag);
    const std::size_t outputs = where == Stagger::faces ? m + 1 : m;
    return Convolver1d(std::move(table), m, outputs, mm - 1, false);
  }

  double h_;
  Convolver1d conv_;
};

}  // namespace estip
