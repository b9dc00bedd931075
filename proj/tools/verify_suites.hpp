#pragma once

// Invariant suites behind `estip verify`. Each suite is a reduced-size run of
// a property check and reports pass/fail plus a one-line detail.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "estip/estip.hpp"

namespace estip::cli {

struct SuiteResult {
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  bool flip_velocity_sign = false;
};

struct Suite {
  std::string name;
  std::function<SuiteResult(const VerifyOptions&)> run;
};

namespace suites {

inline SuiteResult gradient(const VerifyOptions&) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  const Kernel imq = parse_kernel("inverse_multiquadric(eps=1,beta=1)");
  const auto w1 = indicator_1d(0.25, 0.5, Extent1d{-0.5, 1.5, 512});
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    ParticleState<1> s;
    for (int i = 0; i < 5; ++i) s.positions.push_back({u(rng)});
    const ParticleEnergy<1> e(w1, imq, imq);
    const auto g = e.gradient(s.positions);
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto sp = s.positions, sm = s.positions;
      sp[i][0] += 1e-6;
      sm[i][0] -= 1e-6;
      const double fd = (e.energy(sp).total - e.energy(sm).total) / 2e-6;
      worst = std::max(worst, std::abs(fd - g[i][0]) / std::max(1e-8, std::abs(g[i][0])));
    }
  }
  return {worst <= 1e-5, "max relative FD error " + format_double(worst)};
}

inline SuiteResult remark1(const VerifyOptions&) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Kernel k = parse_kernel("abs_power(tau=1.5)");
  const auto w = indicator_1d(0.25, 0.5, Extent1d{-0.5, 1.5, 256});
  const RadialBivariate<1> base(k);
  const auto mod = affine_modify<1>(k, AffineModification{2.0, 3.0, -1.0});
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    ParticleState<1> s;
    for (int i = 0; i < 6; ++i) s.positions.push_back({u(rng)});
    const auto g0 = discrete_gradient_bivariate<1>(s, w, base, base);
    const auto g1 = discrete_gradient_bivariate<1>(s, w, mod, mod);
    for (std::size_t i = 0; i < g0.size(); ++i) worst = std::max(worst, std::abs(g1[i][0] - 2.0 * g0[i][0]));
  }
  return {worst <= 1e-10, "max |grad E~ - a grad E| " + format_double(worst)};
}

inline SuiteResult lower_bound(const VerifyOptions&) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto geom = make_geometry_1d(Extent1d{-0.5, 1.5, 128});
  const auto w = indicator_1d(0.25, 0.5, geom);
  double margin = 1e300;
  for (const char* spec : {"abs_power(tau=1)", "abs_power(tau=0.5)"}) {
    const Kernel k = parse_kernel(spec);
    const double bound = energy_lower_bound(w, k);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> v(geom.size());
      for (auto& x : v) x = u(rng);
      const auto f = normalize(Grid1d(geom, v));
      margin = std::min(margin, continuous_energy(f, w, k, k).total - bound);
    }
  }
  return {margin >= -1e-8, "min E[f] - bound " + format_double(margin)};
}

inline PdeResult short_run(const char* preset, const VerifyOptions& opt, double t_end) {
  auto s = pde_preset(preset);
  s.cells = 256;
  s.cfg.max_time = t_end;
  s.cfg.snapshot_times.clear();
  s.cfg.flip_velocity_sign = opt.flip_velocity_sign;
  const auto p = build_problem(s);
  return TransportSolver(p.w, p.phi, p.psi, s.cfg).evolve(p.f0);
}

inline SuiteResult mass(const VerifyOptions& opt) {
  const auto r = short_run("uniqueness", opt, 5.0);
  const bool ok = r.mass_drift <= 1e-9 && r.max_step_mass_drift <= 1e-14 && r.min_value >= -1e-15;
  return {ok, "mass drift " + format_double(r.mass_drift) + ", min f " + format_double(r.min_value)};
}

inline SuiteResult lyapunov(const VerifyOptions& opt) {
  const auto r = short_run("smoothing", opt, 5.0);
  return {r.max_energy_increase <= 1e-8, "max relative energy increase " + format_double(r.max_energy_increase)};
}

inline SuiteResult remark3(const VerifyOptions& opt) {
  const auto geom = make_geometry_1d(Extent1d{0.0, 1.0, 256}, true);
  const auto w = indicator_1d(0.25, 0.5, geom);
  const auto f0 = indicator_1d(0.65, 0.9, geom);
  const Kernel phi = parse_kernel("bernoulli(m=2,scale=-1)");
  const Kernel psi = parse_kernel("bernoulli(m=1,scale=-1)");
  const Grid1d wt = effective_datum(w, phi, psi).density();
  PdeConfig cfg;
  cfg.dt = 0.01;
  cfg.max_time = 1.0;
  cfg.monitor_energy = false;
  cfg.flip_velocity_sign = opt.flip_velocity_sign;
  const auto two = TransportSolver(w, phi, psi, cfg).evolve(f0);
  const auto one = TransportSolver(wt, psi, psi, cfg).evolve(f0);
  const double d = l1_distance(two.f, one.f);
  return {d <= 0.02, "L1 at t=1 " + format_double(d)};
}

inline SuiteResult uniqueness(const VerifyOptions& opt) {
  auto s = pde_preset("uniqueness");
  s.cells = 512;
  s.cfg.flip_velocity_sign = opt.flip_velocity_sign;
  const auto p = build_problem(s);
  const auto r = TransportSolver(p.w, p.phi, p.psi, s.cfg).evolve(p.f0);
  const double d = l1_distance(r.f, p.w);
  return {d <= 0.05 && r.final_residual <= 1e-8,
          "L1 to w " + format_double(d) + ", residual " + format_double(r.final_residual)};
}

}  // namespace suites

inline std::vector<Suite> all_suites() {
  return {{"gradient", suites::gradient},     {"remark1", suites::remark1},   {"lower-bound", suites::lower_bound},
          {"mass", suites::mass},             {"lyapunov", suites::lyapunov}, {"remark3", suites::remark3},
          {"uniqueness", suites::uniqueness}};
}

}  // namespace estip::cli
