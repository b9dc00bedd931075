#pragma once

// Explicit Euler gradient flow of the particle energy, initialization,
// the 1D quantile minimizer and 1D Wasserstein-1 distances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "estip/datum.hpp"
#include "estip/energy.hpp"
#include "estip/error.hpp"
#include "estip/particle_state.hpp"

namespace estip {

enum class InitKind { uniform_box, from_w_sampling, explicit_list };

template <int Dim>
struct Box {
  Vec<Dim> lo{};
  Vec<Dim> hi{};
};

struct FlowConfig {
  double dt = 1e-3;
  long max_steps = 200000;
  double grad_tol = 1e-6;
  std::uint64_t seed = 1;
  InitKind init = InitKind::from_w_sampling;
  long trace_every = 100;
  bool armijo = true;         // halve dt when a step raises the energy
  double energy_slack = 1e-9;  // per-step tolerance, relative to 1 + |E|
};

struct TraceRow {
  double t = 0.0;
  double attraction = 0.0;
  double repulsion = 0.0;
  double total = 0.0;
  double residual = 0.0;  // gradient sup-norm for particles, dissipation rate for the PDE
  double mass = 1.0;
  double dt = 0.0;
};

using EnergyTrace = std::vector<TraceRow>;

template <int Dim>
struct FlowResult {
  ParticleState<Dim> state;
  EnergyTrace trace;
  bool converged = false;
  long steps = 0;
  double final_grad_sup = 0.0;
  double max_energy_increase = 0.0;  // relative to 1 + |E|
  long halvings = 0;
  std::vector<std::string> warnings;
};

/// Deterministic initial positions. `w` is required for from_w_sampling,
/// `points` for explicit_list.
template <int Dim>
ParticleState<Dim> init_positions(std::size_t n, InitKind init, std::uint64_t seed, const Box<Dim>& box,
                                  const DensityGrid<Dim>* w = nullptr, const std::vector<Vec<Dim>>* points = nullptr) {
  if (init == InitKind::explicit_list) {
    if (points == nullptr || points->empty()) throw ConfigError("explicit_list initialization needs at least one point");
    ParticleState<Dim> s;
    s.positions = *points;
    return s;
  }
  if (n == 0) throw ConfigError("number of particles must be positive");
  for (int a = 0; a < Dim; ++a)
    if (!(box.hi[a] > box.lo[a])) throw ConfigError("initialization box is empty");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ParticleState<Dim> s;
  s.positions.resize(n);
  if (init == InitKind::uniform_box) {
    for (auto& p : s.positions)
      for (int a = 0; a < Dim; ++a) p[a] = box.lo[a] + (box.hi[a] - box.lo[a]) * unit(rng);
    return s;
  }
  if (w == nullptr) throw ConfigError("from_w_sampling initialization needs a datum");
  if (!(w->mass() > 0.0)) throw DatumError(DatumError::Kind::zero_mass, "zero-mass datum");
  if constexpr (Dim == 1) {
    const auto cdf = cumulative_1d(*w);
    for (auto& p : s.positions) p[0] = inverse_cdf_1d(*w, cdf, unit(rng) * cdf.back());
  } else {
    const auto& geo = w->geometry();
    const double wmax = w->max_value();
    for (auto& p : s.positions) {
      for (;;) {
        Vec<Dim> x{};
        std::size_t lin = 0, stride = 1;
        for (int a = 0; a < Dim; ++a) {
          x[a] = geo.origin[a] + static_cast<double>(geo.shape[a]) * geo.spacing * unit(rng);
          auto idx = static_cast<std::size_t>((x[a] - geo.origin[a]) / geo.spacing);
          idx = std::min(idx, geo.shape[a] - 1);
          lin += idx * stride;
          stride *= geo.shape[a];
        }
        if (unit(rng) * wmax < (*w)[lin]) {
          p = x;
          break;
        }
      }
    }
  }
  return s;
}

/// p <- p - dt * grad E(p), t <- t + dt.
template <int Dim>
ParticleState<Dim> euler_step(const ParticleState<Dim>& s, const ParticleEnergy<Dim>& energy, double dt) {
  if (!(dt >= 0.0)) throw ConfigError("time step must be nonnegative");
  const auto g = energy.gradient(s.positions);
  ParticleState<Dim> out = s;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!all_finite(g[i])) throw NumericError("non-finite gradient at particle " + std::to_string(i));
    out.positions[i] -= dt * g[i];
  }
  out.t += dt;
  return out;
}

template <int Dim>
ParticleState<Dim> euler_step(const ParticleState<Dim>& s, const DensityGrid<Dim>& w, const Kernel& phi,
                              const Kernel& psi, double dt) {
  return euler_step(s, ParticleEnergy<Dim>(w, phi, psi), dt);
}

/// Warnings for runs outside the smooth-kernel hypotheses or with a step
/// larger than the inverse Lipschitz estimate of the force field.
inline std::vector<std::string> flow_warnings(const Kernel& phi, const Kernel& psi, double dt, double range) {
  std::vector<std::string> out;
  for (const Kernel* k : {&phi, &psi}) {
    if (k->smoothness() == Smoothness::nonsmooth)
      out.push_back("kernel " + k->spec() + " is not C1; the mean-field convergence hypotheses do not hold");
  }
  if (phi.smoothness() == Smoothness::lipschitz_gradient && psi.smoothness() == Smoothness::lipschitz_gradient) {
    const double lip = gradient_lipschitz_estimate(phi, range) + 2.0 * gradient_lipschitz_estimate(psi, range);
    if (dt * lip > 1.0)
      out.push_back("dt=" + format_double(dt) + " exceeds the stability estimate 1/L=" + format_double(1.0 / lip));
  }
  return out;
}

/// Euler iteration until the gradient sup-norm is at most grad_tol.
template <int Dim>
FlowResult<Dim> evolve_to_steady(const ParticleState<Dim>& s0, const DensityGrid<Dim>& w, const Kernel& phi,
                                 const Kernel& psi, const FlowConfig& cfg) {
  if (!(cfg.dt > 0.0) || cfg.max_steps < 0 || !(cfg.grad_tol > 0.0))
    throw ConfigError("flow config needs dt > 0, max_steps >= 0 and grad_tol > 0");
  const ParticleEnergy<Dim> energy(w, phi, psi);
  FlowResult<Dim> res;
  res.warnings = flow_warnings(phi, psi, cfg.dt, 2.0);
  ParticleState<Dim> cur = s0;
  EnergyReport e = energy.energy(cur.positions);
  auto record = [&](const EnergyReport& rep, double gsup, double dt) {
    res.trace.push_back(TraceRow{cur.t, rep.attraction, rep.repulsion, rep.total, gsup, 1.0, dt});
  };
  for (long step = 0;; ++step) {
    const auto g = energy.gradient(cur.positions);
    const double gsup = gradient_sup_norm(g);
    res.final_grad_sup = gsup;
    const bool stop = gsup <= cfg.grad_tol || step >= cfg.max_steps;
    if (cfg.trace_every > 0 && (step % cfg.trace_every == 0 || stop)) record(e, gsup, cfg.dt);
    if (gsup <= cfg.grad_tol) {
      res.converged = true;
      break;
    }
    if (step >= cfg.max_steps) break;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (!all_finite(g[i])) throw NumericError("non-finite gradient at particle " + std::to_string(i));

    double dt = cfg.dt;
    ParticleState<Dim> next;
    EnergyReport en;
    for (int halving = 0;; ++halving) {
      next = cur;
      for (std::size_t i = 0; i < g.size(); ++i) next.positions[i] -= dt * g[i];
      next.t = cur.t + dt;
      en = energy.energy(next.positions);
      const double rise = (en.total - e.total) / (1.0 + std::abs(e.total));
      if (!cfg.armijo || rise <= cfg.energy_slack || halving >= 40) {
        res.max_energy_increase = std::max(res.max_energy_increase, rise);
        break;
      }
      dt *= 0.5;
      ++res.halvings;
    }
    cur = std::move(next);
    e = en;
    res.steps = step + 1;
  }
  res.state = std::move(cur);
  return res;
}

/// p_k = W^{-1}((2k - 1) / (2N)), the minimizer for phi = psi = |.| in 1D.
inline std::vector<double> quantile_equilibrium(const Grid1d& w, std::size_t n) {
  if (n == 0) throw ConfigError("number of particles must be positive");
  const auto cdf = cumulative_1d(w);
  std::vector<double> p(n);
  for (std::size_t k = 1; k <= n; ++k)
    p[k - 1] = inverse_cdf_1d(w, cdf, cdf.back() * (2.0 * static_cast<double>(k) - 1.0) / (2.0 * static_cast<double>(n)));
  return p;
}

/// int |F_N - F| between the empirical CDF of `x` and the piecewise-linear CDF
/// of a normalized grid density, exact on the union of breakpoints.
inline double wasserstein1_1d(std::vector<double> x, const Grid1d& f) {
  std::sort(x.begin(), x.end());
  const auto cdf = cumulative_1d(f);
  const double total = cdf.back();
  const std::size_t m = f.size();
  const double n = static_cast<double>(x.size());
  std::vector<double> pts;
  pts.reserve(m + 1 + x.size());
  for (std::size_t j = 0; j <= m; ++j) pts.push_back(face_position(f, j));
  pts.insert(pts.end(), x.begin(), x.end());
  std::sort(pts.begin(), pts.end());
  const double lo = face_position(f, 0);
  const double h = f.spacing();
  auto grid_cdf = [&](double y) {
    if (y <= lo) return 0.0;
    const double u = (y - lo) / h;
    const auto j = static_cast<std::size_t>(u);
    if (j >= m) return total;
    return cdf[j] + (u - static_cast<double>(j)) * (cdf[j + 1] - cdf[j]);
  };
  double acc = 0.0;
  std::size_t below = 0;  // particles <= left end of the current piece
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1];
    if (b <= a) continue;
    while (below < x.size() && x[below] <= a) ++below;
    const double c = static_cast<double>(below) / n;
    // F is linear on [a, b]; integrate |F - c| exactly.
    const double fa = grid_cdf(a) - c, fb = grid_cdf(b) - c;
    if (fa * fb >= 0.0) {
      acc += 0.5 * (std::abs(fa) + std::abs(fb)) * (b - a);
    } else {
      acc += 0.5 * (fa * fa + fb * fb) / (std::abs(fa) + std::abs(fb)) * (b - a);
    }
  }
  return acc;
}

inline double wasserstein1_1d(const ParticleState<1>& s, const Grid1d& f) { return wasserstein1_1d(coordinates(s), f); }

/// int |F_a - F_b| between two empirical CDFs.
inline double wasserstein1_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("wasserstein1_1d: empty particle set");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> pts(a);
  pts.insert(pts.end(), b.begin(), b.end());
  std::sort(pts.begin(), pts.end());
  double acc = 0.0;
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    while (ia < a.size() && a[ia] <= pts[i]) ++ia;
    while (ib < b.size() && b[ib] <= pts[i]) ++ib;
    const double fa = static_cast<double>(ia) / static_cast<double>(a.size());
    const double fb = static_cast<double>(ib) / static_cast<double>(b.size());
    acc += std::abs(fa - fb) * (pts[i + 1] - pts[i]);
  }
  return acc;
}

}  // namespace estip
