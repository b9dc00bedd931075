#pragma once

// Named experiment setups shared by the command-line tool and the acceptance
// suite, plus the datum spec grammar `indicator(a,b)`.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "estip/datum.hpp"
#include "estip/error.hpp"
#include "estip/kernels.hpp"
#include "estip/meanfield.hpp"
#include "estip/particles.hpp"

namespace estip {

struct Interval {
  double a = 0.0;
  double b = 1.0;
};

/// Parses `indicator(a,b)`; whitespace is ignored.
inline Interval parse_indicator(std::string_view spec) {
  std::string s;
  for (char c : spec)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  const std::string head = "indicator(";
  auto fail = [&](const std::string& why) -> Interval {
    throw ConfigError("datum spec \"" + std::string(spec) + "\": " + why + " (expected indicator(a,b))");
  };
  if (s.rfind(head, 0) != 0) return fail("unknown datum kind");
  if (s.empty() || s.back() != ')') return fail("missing ')'");
  const std::string body = s.substr(head.size(), s.size() - head.size() - 1);
  const auto comma = body.find(',');
  if (comma == std::string::npos || body.find(',', comma + 1) != std::string::npos) return fail("need two numbers");
  Interval iv;
  auto num = [&](std::string_view t, double& out) {
    const auto r = std::from_chars(t.data(), t.data() + t.size(), out);
    if (r.ec != std::errc() || r.ptr != t.data() + t.size()) fail("bad number '" + std::string(t) + "'");
  };
  num(std::string_view(body).substr(0, comma), iv.a);
  num(std::string_view(body).substr(comma + 1), iv.b);
  if (!(iv.a < iv.b)) return fail("need a < b");
  return iv;
}

/// Default box [-0.5, 1.5], widened with 25% padding when the intervals do
/// not fit with that margin.
inline Extent1d box_for(const std::vector<Interval>& parts, std::size_t cells) {
  Extent1d e{-0.5, 1.5, cells};
  double lo = parts.front().a, hi = parts.front().b;
  for (const auto& p : parts) {
    lo = std::min(lo, p.a);
    hi = std::max(hi, p.b);
  }
  const double pad = 0.25 * (hi - lo);
  if (lo - pad < e.lo || hi + pad > e.hi) {
    e.lo = std::min(e.lo, lo - pad);
    e.hi = std::max(e.hi, hi + pad);
  }
  return e;
}

struct Pde1dSetup {
  std::string name;
  std::string phi = "abs_power(tau=1)";
  std::string psi = "abs_power(tau=1)";
  Interval w{0.25, 0.5};
  std::optional<Interval> f0 = Interval{0.65, 0.9};  // empty: start from w
  std::size_t cells = 1024;
  PdeConfig cfg;
};

struct DeblurSetup {
  std::string blur_phi = "abs_power(tau=1.1)";
  std::string blur_psi = "abs_power(tau=1)";
  Interval w{0.25, 0.5};
  std::size_t cells = 1024;
  long blur_steps = 200;
  double blur_dt = 0.01;
  bool skip_deblur = false;
  PdeConfig deblur_cfg;
};

struct Flow1dSetup {
  std::string name;
  std::string phi = "abs_power(tau=1.1)";
  std::string psi = "abs_power(tau=1)";
  Interval w{0.25, 0.5};
  std::size_t n = 20;
  std::size_t cells = 1024;
  FlowConfig cfg;
};

inline std::vector<std::string> preset_names() {
  return {"smoothing", "sharpening", "uniqueness", "deblur", "fig2-N20", "fig2-N50", "fig2-N100"};
}

inline Pde1dSetup pde_preset(const std::string& name) {
  Pde1dSetup s;
  s.name = name;
  s.cfg.dt = 0.02;
  s.cfg.max_time = 200.0;
  s.cfg.steady_tol = 1e-6;
  if (name == "smoothing") {
    s.phi = "abs_power(tau=1.1)";
    s.psi = "abs_power(tau=1)";
    s.cfg.snapshot_times = {0.0, 1.5, 3.0, 5.0};
  } else if (name == "sharpening") {
    // From f0 = 4 chi[0.65,0.9] part of the mass escapes to infinity, so the
    // run starts from the datum itself.
    s.phi = "abs_power(tau=1)";
    s.psi = "abs_power(tau=1.1)";
    s.f0.reset();
    s.cfg.snapshot_times = {0.0, 1.5, 3.5, 9.5};
  } else if (name == "uniqueness") {
    s.cfg.dt = 0.05;
    s.cfg.max_time = 2000.0;
  } else {
    throw ConfigError("unknown PDE preset '" + name + "' (smoothing, sharpening, uniqueness)");
  }
  return s;
}

inline DeblurSetup deblur_preset() {
  DeblurSetup d;
  d.deblur_cfg.dt = 0.01;
  d.deblur_cfg.max_time = 30.0;
  d.deblur_cfg.steady_tol = 1e-6;
  d.deblur_cfg.snapshot_times = {0.0, 30.0};
  return d;
}

inline Flow1dSetup flow_preset(const std::string& name) {
  Flow1dSetup s;
  s.name = name;
  if (name == "fig2-N20") s.n = 20;
  else if (name == "fig2-N50") s.n = 50;
  else if (name == "fig2-N100") s.n = 100;
  else throw ConfigError("unknown particle preset '" + name + "' (fig2-N20, fig2-N50, fig2-N100)");
  s.cfg.dt = 1e-3;
  s.cfg.grad_tol = 1e-6;
  s.cfg.max_steps = 400000;
  s.cfg.seed = 1;
  s.cfg.trace_every = 1000;
  return s;
}

struct Pde1dProblem {
  Grid1d w;
  Grid1d f0;
  Kernel phi;
  Kernel psi;
};

inline Pde1dProblem build_problem(const Pde1dSetup& s) {
  std::vector<Interval> parts{s.w};
  if (s.f0) parts.push_back(*s.f0);
  const auto geom = make_geometry_1d(box_for(parts, s.cells));
  Grid1d w = indicator_1d(s.w.a, s.w.b, geom);
  Grid1d f0 = s.f0 ? indicator_1d(s.f0->a, s.f0->b, geom) : w;
  return Pde1dProblem{std::move(w), std::move(f0), parse_kernel(s.phi), parse_kernel(s.psi)};
}

struct DeblurResult {
  Grid1d original;
  Grid1d blurred;
  std::optional<PdeResult> deblurred;
  double relative_l1 = 0.0;  // ||f - w||_1 / ||w||_1, blurred if deblur is skipped
};

/// Blur w with (blur_phi, blur_psi) from f0 = w for a fixed number of steps,
/// then evolve with the kernels swapped, datum and start both the blurred g.
inline DeblurResult run_deblur(const DeblurSetup& d) {
  const auto geom = make_geometry_1d(box_for({d.w}, d.cells));
  const Grid1d w = indicator_1d(d.w.a, d.w.b, geom);
  const Kernel phi = parse_kernel(d.blur_phi);
  const Kernel psi = parse_kernel(d.blur_psi);
  DeblurResult out{w, w, std::nullopt, 0.0};
  if (d.blur_steps > 0) {
    PdeConfig blur;
    blur.dt = d.blur_dt;
    blur.max_time = d.blur_dt * static_cast<double>(d.blur_steps);
    blur.steady_tol = 1e-300;
    blur.monitor_energy = false;
    auto r = TransportSolver(w, phi, psi, blur).evolve(w);
    out.blurred = r.f;
  }
  const Grid1d g = normalize(out.blurred);
  // Nothing was blurred, so there is nothing to undo.
  if (!d.skip_deblur && d.blur_steps > 0) {
    out.deblurred = TransportSolver(g, psi, phi, d.deblur_cfg).evolve(g);
    out.relative_l1 = l1_distance(out.deblurred->f, w) / w.mass();
  } else {
    out.relative_l1 = l1_distance(g, w) / w.mass();
  }
  return out;
}

}  // namespace estip
