#pragma once

// 1D mean-field transport  f_t = div(grad K[f] f),  K[f] = phi * w - psi * f,
// discretized with face velocities -grad K[f], upwind fluxes and explicit
// Euler steps. Box grids have zero boundary flux; torus grids wrap around.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "estip/convolve.hpp"
#include "estip/datum.hpp"
#include "estip/energy.hpp"
#include "estip/error.hpp"
#include "estip/format.hpp"
#include "estip/grid_ops.hpp"
#include "estip/kernels.hpp"
#include "estip/particles.hpp"

namespace estip {

struct PdeConfig {
  double dt = 0.02;  // upper bound on the step; CFL may shrink it further
  double cfl = 0.9;
  double max_time = 100.0;
  double steady_tol = 1e-6;  // L1 change per unit time
  std::vector<double> snapshot_times;
  bool monitor_energy = true;
  long trace_every = 1;
  bool flip_velocity_sign = false;  // debug: deliberately wrong transport direction
  double boundary_mass_tol = 1e-14;
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> f;
};

struct PdeResult {
  Grid1d f;
  double t = 0.0;
  long steps = 0;
  bool steady = false;
  EnergyTrace trace;
  std::vector<Snapshot> snapshots;
  double max_energy_increase = 0.0;  // per step, relative to 1 + |E|
  double max_step_mass_drift = 0.0;
  double mass_drift = 0.0;            // |mass(final) - mass(f0)|
  double min_value = 0.0;
  double final_residual = 0.0;
  std::vector<std::string> warnings;
};

/// h * sum_c g_c k'(x_face - x_c) at every face. A positive multiple of
/// |s| on the line is evaluated through prefix sums: scale * (2 G_j - m).
class FaceField {
 public:
  FaceField(const Kernel& k, const GridGeometry<1>& geom)
      : scale_(k.params().scale), sign_(k.is_abs_linear() && !geom.periodic), h_(geom.spacing) {
    if (!sign_) op_.emplace(k, geom, Stagger::faces, true);
  }

  std::vector<double> operator()(const std::vector<double>& g) {
    if (!sign_) return op_->apply(g);
    std::vector<double> out(g.size() + 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) acc += g[i];
    const double total = h_ * acc;
    acc = 0.0;
    out[0] = -scale_ * total;
    for (std::size_t i = 0; i < g.size(); ++i) {
      acc += g[i];
      out[i + 1] = scale_ * (2.0 * h_ * acc - total);
    }
    return out;
  }

  /// The same field by kernel convolution, bypassing the prefix-sum path.
  std::vector<double> by_convolution(const Kernel& k, const GridGeometry<1>& geom, const std::vector<double>& g) const {
    return GridKernelOp(k, geom, Stagger::faces, true).apply(g);
  }

  bool uses_prefix_sums() const noexcept { return sign_; }

 private:
  double scale_;
  bool sign_;
  double h_;
  std::optional<GridKernelOp> op_;
};

class TransportSolver {
 public:
  TransportSolver(const Grid1d& w, Kernel phi, Kernel psi, PdeConfig cfg = {})
      : w_(w), phi_(std::move(phi)), psi_(std::move(psi)), cfg_(std::move(cfg)),
        psi_field_(psi_, w.geometry()), energy_(w, phi_, psi_) {
    if (!(cfg_.dt > 0.0) || !(cfg_.cfl > 0.0 && cfg_.cfl <= 1.0) || !(cfg_.steady_tol > 0.0) || !(cfg_.max_time >= 0.0))
      throw ConfigError("PDE config needs dt > 0, 0 < cfl <= 1, steady_tol > 0 and max_time >= 0");
    FaceField phi_field(phi_, w.geometry());
    attraction_ = phi_field(w.values());
  }

  const Grid1d& datum() const noexcept { return w_; }
  const PdeConfig& config() const noexcept { return cfg_; }
  bool periodic() const noexcept { return w_.geometry().periodic; }

  /// grad K[f] at faces: (w * phi')(y_j) - (f * psi')(y_j).
  std::vector<double> potential_gradient(const std::vector<double>& f) {
    check(f);
    auto g = psi_field_(f);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = attraction_[j] - g[j];
    return g;
  }

  /// Face velocities -grad K[f]; box walls carry zero velocity.
  std::vector<double> velocity(const std::vector<double>& f) {
    auto v = potential_gradient(f);
    const double sign = cfg_.flip_velocity_sign ? 1.0 : -1.0;
    for (auto& x : v) x *= sign;
    if (!periodic()) {
      v.front() = 0.0;
      v.back() = 0.0;
    }
    return v;
  }

  /// int |grad K[f]|^2 f, with grad K at centres averaged from the faces.
  double residual(const std::vector<double>& f) {
    const auto g = potential_gradient(f);
    return residual_from_field(f, g);
  }

  EnergyReport energy(const std::vector<double>& f) { return energy_(f); }

  /// Largest stable step for the given velocities: every cell loses at most
  /// a cfl fraction of its content.
  double cfl_step(const std::vector<double>& v) const {
    const std::size_t m = w_.size();
    double rate = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double right = v[periodic() ? (i + 1) % m : i + 1];
      const double left = v[i];
      rate = std::max(rate, std::max(right, 0.0) + std::max(-left, 0.0));
    }
    if (rate == 0.0) return std::numeric_limits<double>::infinity();
    return cfg_.cfl * w_.spacing() / rate;
  }

  /// f_i <- f_i - dt/h (F_{i+1/2} - F_{i-1/2}) with upwind fluxes.
  std::vector<double> upwind_step(const std::vector<double>& f, const std::vector<double>& v, double dt) const {
    const std::size_t m = f.size();
    std::vector<double> flux(v.size(), 0.0);
    if (periodic()) {
      for (std::size_t j = 0; j < m; ++j) flux[j] = v[j] > 0.0 ? v[j] * f[(j + m - 1) % m] : v[j] * f[j];
    } else {
      for (std::size_t j = 1; j < m; ++j) flux[j] = v[j] > 0.0 ? v[j] * f[j - 1] : v[j] * f[j];
    }
    const double r = dt / w_.spacing();
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double right = periodic() ? flux[(i + 1) % m] : flux[i + 1];
      out[i] = f[i] - r * (right - flux[i]);
    }
    return out;
  }

  PdeResult evolve(const Grid1d& f0) {
    require_same_grid(f0, w_, "evolve_pde");
    require_normalized(f0, "evolve_pde initial density");
    PdeResult res;
    for (const Kernel* k : {&phi_, &psi_})
      if (k->smoothness() == Smoothness::nonsmooth)
        res.warnings.push_back("kernel " + k->spec() + " is not C1; the mean-field convergence hypotheses do not hold");

    std::vector<double> snaps = cfg_.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;

    std::vector<double> f = f0.values();
    const double h = w_.spacing();
    const double mass0 = f0.mass();
    double t = 0.0;
    res.min_value = *std::min_element(f.begin(), f.end());
    check_walls(f, t);

    auto mass_of = [&](const std::vector<double>& g) {
      double s = 0.0;
      for (double x : g) s += x;
      return h * s;
    };

    auto grad = potential_gradient(f);
    std::optional<EnergyReport> e;
    if (cfg_.monitor_energy) e = energy_(f);
    double resid = residual_from_field(f, grad);
    auto record = [&](double dt) {
      if (!e) return;
      res.trace.push_back(TraceRow{t, e->attraction, e->repulsion, e->total, resid, mass_of(f), dt});
    };
    auto take_snapshots = [&] {
      while (next_snap < snaps.size() && snaps[next_snap] <= t + 1e-12) {
        res.snapshots.push_back(Snapshot{t, f});
        ++next_snap;
      }
    };
    take_snapshots();
    record(0.0);

    for (;;) {
      if (t >= cfg_.max_time - 1e-12) break;
      auto v = grad;
      const double sign = cfg_.flip_velocity_sign ? 1.0 : -1.0;
      for (auto& x : v) x *= sign;
      if (!periodic()) {
        v.front() = 0.0;
        v.back() = 0.0;
      }
      double dt = std::min(cfg_.dt, cfl_step(v));
      dt = std::min(dt, cfg_.max_time - t);
      if (next_snap < snaps.size()) dt = std::min(dt, snaps[next_snap] - t);
      if (!(dt > 0.0)) break;

      auto fn = upwind_step(f, v, dt);
      double change = 0.0;
      double before = 0.0, after = 0.0;
      for (std::size_t i = 0; i < fn.size(); ++i) {
        if (!std::isfinite(fn[i])) throw NumericError("non-finite density at cell " + std::to_string(i) + ", t=" + format_double(t));
        change += std::abs(fn[i] - f[i]);
        before += f[i];
        after += fn[i];
        res.min_value = std::min(res.min_value, fn[i]);
      }
      res.max_step_mass_drift = std::max(res.max_step_mass_drift, h * std::abs(after - before));
      f = std::move(fn);
      t += dt;
      ++res.steps;
      check_walls(f, t);

      grad = potential_gradient(f);
      resid = residual_from_field(f, grad);
      if (cfg_.monitor_energy) {
        const EnergyReport en = energy_(f);
        res.max_energy_increase = std::max(res.max_energy_increase, (en.total - e->total) / (1.0 + std::abs(e->total)));
        e = en;
      }
      if (cfg_.trace_every > 0 && res.steps % cfg_.trace_every == 0) record(dt);
      take_snapshots();
      if (h * change / dt <= cfg_.steady_tol) {
        res.steady = true;
        // Keep stepping until the last requested snapshot has been taken.
        if (next_snap >= snaps.size()) break;
      }
    }
    if (cfg_.trace_every > 0 && !res.trace.empty() && res.trace.back().t != t) record(0.0);
    res.t = t;
    res.final_residual = resid;
    res.mass_drift = std::abs(mass_of(f) - mass0);
    res.f = Grid1d(w_.geometry(), std::move(f));
    return res;
  }

 private:
  void check(const std::vector<double>& f) const {
    if (f.size() != w_.size())
      throw DatumError(DatumError::Kind::grid_mismatch, "transport: density and datum sizes differ");
  }

  void check_walls(const std::vector<double>& f, double t) const {
    if (periodic()) return;
    const double h = w_.spacing();
    if (h * f.front() > cfg_.boundary_mass_tol || h * f.back() > cfg_.boundary_mass_tol)
      throw NumericError("density support reached the edge of the computational box at t=" + format_double(t) +
                         "; enlarge the box");
  }

  double residual_from_field(const std::vector<double>& f, const std::vector<double>& g) const {
    const std::size_t m = f.size();
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double right = g[periodic() ? (i + 1) % m : i + 1];
      const double c = 0.5 * (g[i] + right);
      s += c * c * f[i];
    }
    return s * w_.spacing();
  }

  Grid1d w_;
  Kernel phi_;
  Kernel psi_;
  PdeConfig cfg_;
  FaceField psi_field_;
  ContinuousEnergy1d energy_;
  std::vector<double> attraction_;
};

inline PdeResult evolve_pde(const Grid1d& f0, const Grid1d& w, const Kernel& phi, const Kernel& psi, const PdeConfig& cfg) {
  return TransportSolver(w, phi, psi, cfg).evolve(f0);
}

/// Face velocities -grad K[f] (zero at box walls).
inline std::vector<double> transport_field(const Grid1d& f, const Grid1d& w, const Kernel& phi, const Kernel& psi) {
  require_same_grid(f, w, "transport_field");
  return TransportSolver(w, phi, psi).velocity(f.values());
}

inline double equilibrium_residual(const Grid1d& f, const Grid1d& w, const Kernel& phi, const Kernel& psi) {
  require_same_grid(f, w, "equilibrium_residual");
  return TransportSolver(w, phi, psi).residual(f.values());
}

/// G = 2W - 2F at the cell faces.
inline std::vector<double> cdf_gap(const Grid1d& f, const Grid1d& w) {
  require_same_grid(f, w, "cdf_gap");
  const auto cf = cumulative_1d(f);
  const auto cw = cumulative_1d(w);
  std::vector<double> g(cf.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = 2.0 * cw[j] - 2.0 * cf[j];
  return g;
}

// ---------------------------------------------------------------------------
// Effective datum on the torus

struct EffectiveDatum {
  GridGeometry<1> geometry;
  std::vector<double> values;              // may be negative for sharpening pairs
  std::vector<std::size_t> guarded_modes;  // DFT indices regularized by the guard

  Grid1d density() const {
    for (std::size_t i = 0; i < values.size(); ++i)
      if (values[i] < -1e-12)
        throw DatumError(DatumError::Kind::negative,
                         "effective datum is negative at cell " + std::to_string(i) + " (" + format_double(values[i]) + ")");
    std::vector<double> v(values);
    for (auto& x : v) x = std::max(x, 0.0);
    return Grid1d(geometry, std::move(v));
  }
};

/// w~ with (w~ * psi) = (w * phi) on a periodic grid: the DFT of w is
/// multiplied by phi^ / psi^. Modes with |psi^| < delta = 1e-8 max|psi^| use
/// phi^ conj(psi^) / (|psi^|^2 + delta^2); more than 10% of them is an error.
inline EffectiveDatum effective_datum(const Grid1d& w, const Kernel& phi, const Kernel& psi) {
  const auto& geo = w.geometry();
  if (!geo.periodic) throw ConfigError("effective_datum needs a periodic grid");
  if (!phi.periodic() || !psi.periodic()) throw ConfigError("effective_datum needs torus kernels");
  const std::size_t m = w.size();
  const double h = geo.spacing;
  std::vector<double> tp(m), ts(m);
  for (std::size_t i = 0; i < m; ++i) {
    tp[i] = phi.eval1(static_cast<double>(i) * h);
    ts[i] = psi.eval1(static_cast<double>(i) * h);
  }
  RealFft fft(m);
  const auto ph = fft.forward(tp);
  const auto sh = fft.forward(ts);
  auto wh = fft.forward(w.values());
  double smax = 0.0;
  for (std::size_t k = 1; k < sh.size(); ++k) smax = std::max(smax, std::abs(sh[k]));
  const double delta = 1e-8 * smax;

  EffectiveDatum out;
  out.geometry = geo;
  for (std::size_t k = 1; k < sh.size(); ++k) {
    std::complex<double> ratio;
    if (ph[k] == sh[k]) {
      ratio = 1.0;
    } else if (std::abs(sh[k]) < delta) {
      ratio = ph[k] * std::conj(sh[k]) / (std::norm(sh[k]) + delta * delta);
      out.guarded_modes.push_back(k);
      if (k != m - k && 2 * k != m) out.guarded_modes.push_back(m - k);
    } else {
      ratio = ph[k] / sh[k];
    }
    wh[k] *= ratio;
  }
  std::sort(out.guarded_modes.begin(), out.guarded_modes.end());
  if (10 * out.guarded_modes.size() > m - 1)
    throw ConfigError("kernel ratio ill-posed: " + std::to_string(out.guarded_modes.size()) + " of " +
                      std::to_string(m - 1) + " modes have a vanishing psi transform");
  out.values = fft.backward(wh);
  return out;
}

/// Spectral energy of `v` in DFT modes with min(k, M - k) > M / 4.
inline double tail_spectral_energy(const std::vector<double>& v) {
  const std::size_t m = v.size();
  RealFft fft(m);
  const auto s = fft.forward(v);
  double acc = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k <= m / 4) continue;
    const double weight = (2 * k == m) ? 1.0 : 2.0;
    acc += weight * std::norm(s[k]);
  }
  return acc;
}

}  // namespace estip
