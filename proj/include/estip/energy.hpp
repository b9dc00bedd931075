#pragma once

// Discrete two-kernel energy
//   E(p) = sum_k int w(x) phi(p_k - x) dx - 1/(2N) sum_{k,l} psi(p_k - p_l),
// its gradient, the continuous energy of a grid density and the lower bound
// for concave increasing profiles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "estip/datum.hpp"
#include "estip/error.hpp"
#include "estip/format.hpp"
#include "estip/grid_ops.hpp"
#include "estip/kernels.hpp"
#include "estip/particle_state.hpp"
#include "estip/vec.hpp"

namespace estip {

struct EnergyReport {
  double attraction = 0.0;
  double repulsion = 0.0;
  double total = 0.0;
  std::optional<double> lower_bound;
};

inline EnergyReport make_report(double attraction, double repulsion) {
  return EnergyReport{attraction, repulsion, attraction - repulsion, std::nullopt};
}

/// x -> int w(y) phi(x - y) dy and its gradient.
///
/// In 1D the piecewise-constant density is integrated exactly through the
/// odd primitive P of phi: int w phi(p - .) = sum_k P(p - e_k)(w_k - w_{k-1})
/// over cell edges e_k, and the gradient is the same sum with phi in place of
/// P. Only edges where w jumps contribute. In 2D the midpoint rule is used.
template <int Dim>
class AttractionIntegrator {
 public:
  AttractionIntegrator(const DensityGrid<Dim>& w, Kernel phi) : phi_(std::move(phi)) {
    if (phi_.periodic() != w.geometry().periodic)
      throw ConfigError("kernel " + phi_.spec() + " and datum grid disagree about periodicity");
    if constexpr (Dim == 1) {
      const std::size_t m = w.size();
      const double lo = w.geometry().origin[0];
      const double h = w.spacing();
      const bool per = w.geometry().periodic;
      for (std::size_t k = 0; k <= m; ++k) {
        if (per && k == m) break;
        const double right = k < m ? w[k] : 0.0;
        const double left = k > 0 ? w[k - 1] : (per ? w[m - 1] : 0.0);
        const double jump = right - left;
        if (jump != 0.0) {
          edges_.push_back(lo + static_cast<double>(k) * h);
          jumps_.push_back(jump);
        }
      }
      if (per) offset_ = w[m - 1] * phi_.period_integral();
    } else {
      const double vol = w.geometry().cell_volume();
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] == 0.0) continue;
        nodes_.push_back(w.center(i));
        weights_.push_back(vol * w[i]);
      }
    }
  }

  double value(const Vec<Dim>& p) const {
    double s = 0.0;
    if constexpr (Dim == 1) {
      for (std::size_t k = 0; k < edges_.size(); ++k) s += phi_.primitive(p[0] - edges_[k]) * jumps_[k];
      s += offset_;
    } else {
      for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * phi_.eval<Dim>(p - nodes_[i]);
    }
    return s;
  }

  Vec<Dim> gradient(const Vec<Dim>& p) const {
    Vec<Dim> g{};
    if constexpr (Dim == 1) {
      for (std::size_t k = 0; k < edges_.size(); ++k) g[0] += phi_.eval1(p[0] - edges_[k]) * jumps_[k];
    } else {
      for (std::size_t i = 0; i < nodes_.size(); ++i) g += weights_[i] * phi_.grad<Dim>(p - nodes_[i]);
    }
    return g;
  }

  const Kernel& kernel() const noexcept { return phi_; }

 private:
  Kernel phi_;
  std::vector<double> edges_;
  std::vector<double> jumps_;
  double offset_ = 0.0;
  std::vector<Vec<Dim>> nodes_;
  std::vector<double> weights_;
};

/// Energy and gradient of a particle configuration against a fixed datum.
template <int Dim>
class ParticleEnergy {
 public:
  ParticleEnergy(const DensityGrid<Dim>& w, Kernel phi, Kernel psi)
      : attraction_(w, std::move(phi)), psi_(std::move(psi)) {
    require_normalized(w, "discrete energy");
  }

  EnergyReport energy(const std::vector<Vec<Dim>>& p) const {
    const auto n = static_cast<std::ptrdiff_t>(p.size());
    if (n == 0) throw ConfigError("discrete energy needs at least one particle");
    const auto order = position_order(p);
    std::vector<double> att(p.size()), rep(p.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      att[k] = attraction_.value(p[k]);
      double r = 0.0;
      for (auto l : order) r += psi_.eval<Dim>(p[k] - p[l]);
      rep[k] = r;
    }
    double a = 0.0, r = 0.0;
    for (auto k : order) {
      a += att[k];
      r += rep[k];
    }
    return make_report(a, r / (2.0 * static_cast<double>(n)));
  }

  std::vector<Vec<Dim>> gradient(const std::vector<Vec<Dim>>& p) const {
    const auto n = static_cast<std::ptrdiff_t>(p.size());
    const auto order = position_order(p);
    std::vector<Vec<Dim>> g(p.size());
    const double inv_n = 1.0 / static_cast<double>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      Vec<Dim> rep{};
      for (auto l : order) rep += psi_.grad<Dim>(p[i] - p[l]);
      g[i] = attraction_.gradient(p[i]) - inv_n * rep;
    }
    return g;
  }

  const Kernel& phi() const noexcept { return attraction_.kernel(); }
  const Kernel& psi() const noexcept { return psi_; }

 private:
  // Pair sums run over particles sorted by position, so relabeling the
  // particles permutes the results bit for bit.
  static std::vector<std::size_t> position_order(const std::vector<Vec<Dim>>& p) {
    std::vector<std::size_t> order(p.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    return order;
  }

  AttractionIntegrator<Dim> attraction_;
  Kernel psi_;
};

template <int Dim>
EnergyReport discrete_energy(const ParticleState<Dim>& s, const DensityGrid<Dim>& w, const Kernel& phi,
                             const Kernel& psi) {
  return ParticleEnergy<Dim>(w, phi, psi).energy(s.positions);
}

template <int Dim>
std::vector<Vec<Dim>> discrete_gradient(const ParticleState<Dim>& s, const DensityGrid<Dim>& w, const Kernel& phi,
                                        const Kernel& psi) {
  return ParticleEnergy<Dim>(w, phi, psi).gradient(s.positions);
}

/// Continuous energy of the empirical measure, E / N.
template <int Dim>
double empirical_energy(const ParticleState<Dim>& s, const DensityGrid<Dim>& w, const Kernel& phi, const Kernel& psi) {
  return discrete_energy(s, w, phi, psi).total / static_cast<double>(s.size());
}

template <std::size_t N>
double gradient_sup_norm(const std::vector<std::array<double, N>>& g) {
  double m = 0.0;
  for (const auto& v : g) m = std::max(m, sup_norm(v));
  return m;
}

// ---------------------------------------------------------------------------
// Bivariate kernels (midpoint attraction)

template <int Dim, class KA, class KR>
  requires BivariateKernel<KA, Dim> && BivariateKernel<KR, Dim>
EnergyReport discrete_energy_bivariate(const ParticleState<Dim>& s, const DensityGrid<Dim>& w, const KA& phi,
                                       const KR& psi) {
  require_normalized(w, "discrete energy");
  const std::size_t n = s.size();
  double a = 0.0, r = 0.0;
  for (const auto& p : s.positions) a += quadrature(w, [&](const Vec<Dim>& x) { return phi.value(p, x); });
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) r += psi.value(s.positions[k], s.positions[l]);
  return make_report(a, r / (2.0 * static_cast<double>(n)));
}

template <int Dim, class KA, class KR>
  requires BivariateKernel<KA, Dim> && BivariateKernel<KR, Dim>
std::vector<Vec<Dim>> discrete_gradient_bivariate(const ParticleState<Dim>& s, const DensityGrid<Dim>& w,
                                                  const KA& phi, const KR& psi) {
  require_normalized(w, "discrete energy");
  const std::size_t n = s.size();
  const double vol = w.geometry().cell_volume();
  std::vector<Vec<Dim>> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec<Dim> att{}, rep{};
    for (std::size_t c = 0; c < w.size(); ++c) {
      if (w[c] == 0.0) continue;
      att += (vol * w[c]) * phi.grad_first(s.positions[i], w.center(c));
    }
    for (std::size_t l = 0; l < n; ++l) rep += psi.grad_first(s.positions[i], s.positions[l]);
    g[i] = att - (1.0 / static_cast<double>(n)) * rep;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Continuous energy  E[f] = int int w phi f - 1/2 int int f psi f

enum class ConvolutionPath { fft, direct };

/// Cached evaluator of the continuous energy on a fixed 1D grid and datum.
class ContinuousEnergy1d {
 public:
  ContinuousEnergy1d(const Grid1d& w, const Kernel& phi, const Kernel& psi)
      : geom_(w.geometry()), psi_op_(psi, w.geometry(), Stagger::centers, false) {
    GridKernelOp phi_op(phi, w.geometry(), Stagger::centers, false);
    potential_ = phi_op.apply(w.values());
  }

  EnergyReport operator()(const std::vector<double>& f, ConvolutionPath path = ConvolutionPath::fft) {
    if (f.size() != potential_.size())
      throw DatumError(DatumError::Kind::grid_mismatch, "continuous energy: density and datum sizes differ");
    const auto self = path == ConvolutionPath::fft ? psi_op_.apply(f) : psi_op_.apply_direct(f);
    double a = 0.0, r = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      a += f[i] * potential_[i];
      r += f[i] * self[i];
    }
    const double h = geom_.spacing;
    return make_report(h * a, 0.5 * h * r);
  }

 private:
  GridGeometry<1> geom_;
  GridKernelOp psi_op_;
  std::vector<double> potential_;
};

template <int Dim>
EnergyReport continuous_energy(const DensityGrid<Dim>& f, const DensityGrid<Dim>& w, const Kernel& phi,
                               const Kernel& psi, ConvolutionPath path = ConvolutionPath::fft) {
  require_same_grid(f, w, "continuous energy");
  if constexpr (Dim == 1) {
    if (path == ConvolutionPath::fft) return ContinuousEnergy1d(w, phi, psi)(f.values());
  }
  std::vector<std::size_t> fs, ws;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] != 0.0) fs.push_back(i);
    if (w[i] != 0.0) ws.push_back(i);
  }
  const double vol = f.geometry().cell_volume();
  double a = 0.0, r = 0.0;
  for (auto p : fs) {
    const auto xp = f.center(p);
    double ap = 0.0, rp = 0.0;
    for (auto x : ws) ap += w[x] * phi.eval<Dim>(xp - w.center(x));
    for (auto q : fs) rp += f[q] * psi.eval<Dim>(xp - f.center(q));
    a += f[p] * ap;
    r += f[p] * rp;
  }
  return make_report(vol * vol * a, 0.5 * vol * vol * r);
}

// ---------------------------------------------------------------------------
// Lower bound for concave, increasing profiles

/// -int w(x) (Phi(|x|) - Phi(0)) dx + Phi(0)/2, a lower bound of E[f] with
/// phi = psi = Phi for every normalized f. The profile is probed for
/// monotonicity and concavity on 1000 points of [0, 2 max|x|] over supp w.
template <int Dim>
double energy_lower_bound(const DensityGrid<Dim>& w, const Kernel& phi) {
  double reach = w.spacing();
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] != 0.0) reach = std::max(reach, 2.0 * norm(w.center(i)));
  if (phi.periodic()) reach = std::min(reach, 0.5);
  constexpr int samples = 1000;
  std::vector<double> s(samples), v(samples);
  for (int i = 0; i < samples; ++i) {
    s[i] = reach * i / (samples - 1);
    v[i] = phi.profile(s[i]);
  }
  const double slack = 1e-12;
  for (int i = 0; i + 1 < samples; ++i) {
    if (v[i + 1] < v[i] - slack * (1.0 + std::abs(v[i])))
      throw ConfigError("energy lower bound: profile " + phi.spec() + " decreases between s=" + format_double(s[i]) +
                        " and s=" + format_double(s[i + 1]));
  }
  for (int i = 1; i + 1 < samples; ++i) {
    const double d2 = v[i + 1] - 2.0 * v[i] + v[i - 1];
    if (d2 > slack * (1.0 + std::abs(v[i])))
      throw ConfigError("energy lower bound: profile " + phi.spec() + " is not concave between s=" +
                        format_double(s[i - 1]) + " and s=" + format_double(s[i + 1]));
  }
  const double phi0 = phi.profile(0.0);
  const double integral = quadrature(w, [&](const Vec<Dim>& x) { return phi.profile(norm(x)) - phi0; });
  return -integral + 0.5 * phi0 * w.mass() * w.mass();
}

}  // namespace estip
