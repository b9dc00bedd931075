// estip: command-line front end for the particle flow, the mean-field PDE,
// deblurring, image halftoning and the invariant suites.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "estip/estip.hpp"
#include "verify_suites.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace estip;

namespace {

enum Exit { ok = 0, usage = 1, numeric = 2, verification = 3 };

struct Common {
  std::string out = ".";
  std::uint64_t seed = 1;
};

fs::path out_dir(const Common& c) {
  fs::path p(c.out);
  fs::create_directories(p);
  return p;
}

json manifest_base(const std::string& sub, const std::vector<std::string>& argv) {
  json m;
  m["tool"] = "estip";
  m["subcommand"] = sub;
  m["argv"] = argv;
  return m;
}

void write_manifest(const fs::path& dir, const json& m) { write_file((dir / "manifest.json").string(), m.dump(2) + "\n"); }

json pde_config_json(const PdeConfig& c) {
  return json{{"dt", c.dt},
              {"cfl", c.cfl},
              {"max_time", c.max_time},
              {"steady_tol", c.steady_tol},
              {"snapshot_times", c.snapshot_times},
              {"flip_velocity_sign", c.flip_velocity_sign}};
}

json flow_config_json(const FlowConfig& c) {
  return json{{"dt", c.dt}, {"max_steps", c.max_steps}, {"grad_tol", c.grad_tol}, {"seed", c.seed},
              {"init", c.init == InitKind::uniform_box ? "uniform_box" : "from_w_sampling"}};
}

// ---------------------------------------------------------------------------

struct Flow1dArgs {
  std::string preset;
  std::optional<std::size_t> n;
  std::string phi, psi, w;
  std::size_t cells = 1024;
  std::optional<double> dt, grad_tol;
  std::optional<long> max_steps;
  std::string init = "from_w_sampling";
};

int cmd_flow1d(const Flow1dArgs& a, const Common& c, const std::vector<std::string>& argv) {
  Flow1dSetup s;
  if (!a.preset.empty()) {
    s = flow_preset(a.preset);
  } else if (a.w.empty()) {
    throw CLI::RequiredError("--w (or --preset)");
  }
  if (!a.w.empty()) s.w = parse_indicator(a.w);
  if (!a.phi.empty()) s.phi = a.phi;
  if (!a.psi.empty()) s.psi = a.psi;
  if (a.n) s.n = *a.n;
  s.cells = a.cells;
  if (a.dt) s.cfg.dt = *a.dt;
  if (a.grad_tol) s.cfg.grad_tol = *a.grad_tol;
  if (a.max_steps) s.cfg.max_steps = *a.max_steps;
  s.cfg.seed = c.seed;
  s.cfg.init = a.init == "uniform_box" ? InitKind::uniform_box : InitKind::from_w_sampling;
  if (s.cfg.trace_every <= 0) s.cfg.trace_every = 1000;

  const auto extent = box_for({s.w}, s.cells);
  const Grid1d w = indicator_1d(s.w.a, s.w.b, make_geometry_1d(extent));
  const Kernel phi = parse_kernel(s.phi), psi = parse_kernel(s.psi);
  Box<1> box{{extent.lo}, {extent.hi}};
  const auto s0 = init_positions<1>(s.n, s.cfg.init, s.cfg.seed, box, &w);
  const auto r = evolve_to_steady<1>(s0, w, phi, psi, s.cfg);
  for (const auto& msg : r.warnings) std::cerr << "warning: " << msg << "\n";

  const auto dir = out_dir(c);
  write_file((dir / "positions.csv").string(),
             positions_csv<1>({{0L, s0}, {r.steps, r.state}}));
  write_file((dir / "energy.csv").string(), energy_csv(r.trace));
  const double w1 = wasserstein1_1d(r.state, w);
  json m = manifest_base("flow1d", argv);
  m["config"] = {{"n", s.n}, {"phi", phi.spec()}, {"psi", psi.spec()}, {"w", {s.w.a, s.w.b}},
                 {"grid", grid_sidecar(w)}, {"flow", flow_config_json(s.cfg)}};
  m["results"] = {{"converged", r.converged}, {"steps", r.steps}, {"grad_sup", r.final_grad_sup},
                  {"w1_to_w", w1}, {"halvings", r.halvings}};
  write_manifest(dir, m);

  const auto x = coordinates(r.state);
  std::printf("flow1d: N=%zu converged=%s steps=%ld grad_sup=%s W1(w)=%s\n", s.n, r.converged ? "yes" : "no", r.steps,
              format_double(r.final_grad_sup).c_str(), format_double(w1).c_str());
  if (x.size() == 1) std::printf("position: %s\n", format_double(x[0]).c_str());
  return ok;
}

// ---------------------------------------------------------------------------

struct Pde1dArgs {
  std::string preset;
  std::string phi, psi, w, f0;
  std::optional<std::size_t> cells;
  std::optional<double> dt, cfl, max_time, steady_tol;
  std::vector<double> snapshots;
  bool flip = false;
};

int cmd_pde1d(const Pde1dArgs& a, const Common& c, const std::vector<std::string>& argv) {
  Pde1dSetup s;
  if (!a.preset.empty()) {
    s = pde_preset(a.preset);
  } else {
    if (a.w.empty()) throw CLI::RequiredError("--w (or --preset)");
    s.cfg.max_time = 200.0;
  }
  if (!a.w.empty()) s.w = parse_indicator(a.w);
  if (!a.f0.empty()) {
    if (a.f0 == "w") s.f0.reset();
    else s.f0 = parse_indicator(a.f0);
  }
  if (!a.phi.empty()) s.phi = a.phi;
  if (!a.psi.empty()) s.psi = a.psi;
  if (a.cells) s.cells = *a.cells;
  if (a.dt) s.cfg.dt = *a.dt;
  if (a.cfl) s.cfg.cfl = *a.cfl;
  if (a.max_time) s.cfg.max_time = *a.max_time;
  if (a.steady_tol) s.cfg.steady_tol = *a.steady_tol;
  if (!a.snapshots.empty()) s.cfg.snapshot_times = a.snapshots;
  s.cfg.flip_velocity_sign = a.flip;

  const auto p = build_problem(s);
  TransportSolver solver(p.w, p.phi, p.psi, s.cfg);
  const auto r = solver.evolve(p.f0);
  for (const auto& msg : r.warnings) std::cerr << "warning: " << msg << "\n";

  const auto dir = out_dir(c);
  std::vector<Snapshot> snaps = r.snapshots;
  snaps.push_back(Snapshot{r.t, r.f.values()});
  write_file((dir / "snapshots.csv").string(), snapshots_csv(snaps, p.w));
  write_file((dir / "energy.csv").string(), energy_csv(r.trace));
  write_file((dir / "monitor.csv").string(), monitor_csv(r.trace));
  write_file((dir / "final.csv").string(), density_csv(r.f));
  const double gap = l1_distance(r.f, p.w);
  json m = manifest_base("pde1d", argv);
  m["config"] = {{"phi", p.phi.spec()}, {"psi", p.psi.spec()}, {"w", {s.w.a, s.w.b}},
                 {"f0", s.f0 ? json{s.f0->a, s.f0->b} : json("w")}, {"grid", grid_sidecar(p.w)},
                 {"pde", pde_config_json(s.cfg)}};
  m["results"] = {{"t", r.t}, {"steps", r.steps}, {"steady", r.steady}, {"final_residual", r.final_residual},
                  {"l1_to_w", gap}, {"mass_drift", r.mass_drift}, {"max_energy_increase", r.max_energy_increase}};
  write_manifest(dir, m);
  std::printf("pde1d: t=%s steps=%ld steady=%s residual=%s L1(f,w)=%s\n", format_double(r.t).c_str(), r.steps,
              r.steady ? "yes" : "no", format_double(r.final_residual).c_str(), format_double(gap).c_str());
  return ok;
}

// ---------------------------------------------------------------------------

struct DeblurArgs {
  std::optional<long> blur_steps;
  std::optional<double> blur_dt, max_time;
  std::optional<std::size_t> cells;
  bool skip = false;
};

int cmd_deblur(const DeblurArgs& a, const Common& c, const std::vector<std::string>& argv) {
  DeblurSetup d = deblur_preset();
  if (a.blur_steps) d.blur_steps = *a.blur_steps;
  if (a.blur_dt) d.blur_dt = *a.blur_dt;
  if (a.max_time) {
    d.deblur_cfg.max_time = *a.max_time;
    d.deblur_cfg.snapshot_times = {0.0, *a.max_time};
  }
  if (a.cells) d.cells = *a.cells;
  d.skip_deblur = a.skip;
  const auto r = run_deblur(d);
  const auto dir = out_dir(c);
  write_file((dir / "blurred.csv").string(), density_csv(r.blurred));
  if (r.deblurred) {
    std::vector<Snapshot> snaps = r.deblurred->snapshots;
    write_file((dir / "snapshots.csv").string(), snapshots_csv(snaps, r.original));
    write_file((dir / "final.csv").string(), density_csv(r.deblurred->f));
    write_file((dir / "monitor.csv").string(), monitor_csv(r.deblurred->trace));
  }
  json m = manifest_base("deblur", argv);
  m["config"] = {{"blur_steps", d.blur_steps}, {"blur_dt", d.blur_dt}, {"skip_deblur", d.skip_deblur},
                 {"grid", grid_sidecar(r.original)}, {"deblur", pde_config_json(d.deblur_cfg)}};
  m["results"] = {{"relative_l1", r.relative_l1}};
  if (r.deblurred) m["results"]["t"] = r.deblurred->t;
  write_manifest(dir, m);
  std::printf("deblur: relative L1 error %s%s\n", format_double(r.relative_l1).c_str(),
              r.deblurred ? "" : " (blurred datum, no deblurring phase)");
  return ok;
}

// ---------------------------------------------------------------------------

struct HalftoneArgs {
  std::string image;
  std::size_t n = 800;
  std::string phi = "abs_power(tau=1)", psi = "abs_power(tau=1)";
  double dt = 1e-3;
  long max_steps = 300;
  double grad_tol = 1e-6;
  int coarsen = 0;
  std::size_t blocks = 4;
  std::size_t canvas = 256;
  double dot_radius = 1.5;
  double margin = 0.05;
};

Grid2d load_datum_image(const std::string& spec) {
  if (spec == "builtin:twotone64") return image_to_density(two_tone_image(64));
  if (spec == "builtin:gradient64") return image_to_density(gradient_image(64));
  return load_image(spec);
}

int cmd_halftone(const HalftoneArgs& a, const Common& c, const std::vector<std::string>& argv) {
  const Grid2d img = load_datum_image(a.image);
  FlowConfig cfg;
  cfg.dt = a.dt;
  cfg.max_steps = a.max_steps;
  cfg.grad_tol = a.grad_tol;
  cfg.seed = c.seed;
  cfg.trace_every = 10;
  const Kernel phi = parse_kernel(a.phi, 2), psi = parse_kernel(a.psi, 2);
  const auto r = halftone_image(img, a.n, phi, psi, cfg, a.coarsen);
  const auto rep = density_consistency(r.state.positions, img, a.blocks);
  CanvasConfig canvas = canvas_for(img.geometry(), a.canvas, a.margin);
  canvas.dot_radius = a.dot_radius;
  const auto dir = out_dir(c);
  write_file((dir / "dots.pgm").string(), render_dots(r.state.positions, canvas));
  write_file((dir / "positions.csv").string(), positions_csv<2>({{r.steps, r.state}}));
  write_file((dir / "blocks.csv").string(), block_report_csv(rep));
  write_file((dir / "energy.csv").string(), energy_csv(r.trace));
  json m = manifest_base("halftone", argv);
  m["config"] = {{"image", a.image}, {"n", a.n}, {"phi", phi.spec()}, {"psi", psi.spec()}, {"coarsen", a.coarsen},
                 {"blocks", a.blocks},
                 {"canvas", {{"width", canvas.width}, {"height", canvas.height}, {"margin", a.margin}}},
                 {"grid", grid_sidecar(img)}, {"flow", flow_config_json(cfg)}};
  m["results"] = {{"converged", r.converged}, {"steps", r.steps}, {"grad_sup", r.final_grad_sup},
                  {"max_discrepancy", rep.max_discrepancy}, {"chi2", rep.chi2}, {"degenerate", rep.degenerate}};
  write_manifest(dir, m);
  std::printf("halftone: N=%zu steps=%ld max block discrepancy=%s chi2=%s%s\n", a.n, r.steps,
              format_double(rep.max_discrepancy).c_str(), format_double(rep.chi2).c_str(),
              rep.degenerate ? " (degenerate: too few particles per block)" : "");
  return ok;
}

// ---------------------------------------------------------------------------

int cmd_verify(const std::vector<std::string>& only, bool flip) {
  cli::VerifyOptions opt;
  opt.flip_velocity_sign = flip;
  const auto suites = cli::all_suites();
  for (const auto& name : only) {
    bool known = false;
    for (const auto& s : suites) known = known || s.name == name;
    if (!known) throw CLI::ValidationError("--only", "unknown suite '" + name + "'");
  }
  bool all = true;
  std::printf("%-12s %-6s %s\n", "suite", "result", "detail");
  for (const auto& s : suites) {
    if (!only.empty() && std::find(only.begin(), only.end(), s.name) == only.end()) continue;
    cli::SuiteResult r;
    try {
      r = s.run(opt);
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    all = all && r.pass;
    std::printf("%-12s %-6s %s\n", s.name.c_str(), r.pass ? "PASS" : "FAIL", r.detail.c_str());
  }
  return all ? ok : verification;
}

int run(const std::vector<std::string>& args);

int cmd_replay(const std::string& path, const std::string& out_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read manifest '" + path + "'");
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("manifest '" + path + "' is not valid JSON: " + e.what());
  }
  if (!m.contains("argv") || !m["argv"].is_array()) throw ConfigError("manifest '" + path + "' has no argv");
  auto args = m["argv"].get<std::vector<std::string>>();
  if (!out_override.empty()) {
    auto it = std::find(args.begin(), args.end(), "--out");
    if (it != args.end() && it + 1 != args.end()) *(it + 1) = out_override;
    else {
      args.push_back("--out");
      args.push_back(out_override);
    }
  }
  return run(args);
}

void apply_thread_env() {
#ifdef _OPENMP
  if (const char* t = std::getenv("ESTIP_THREADS")) {
    const int n = std::atoi(t);
    if (n > 0) omp_set_num_threads(n);
  }
#endif
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Electrostatic halftoning: particle flows, mean-field transport and stippling.\n"
               "Thread count: ESTIP_THREADS. Exit codes: 0 ok, 1 usage, 2 numeric failure, 3 verification failure."};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", common.seed, "Random seed")->capture_default_str();
  };

  Flow1dArgs fa;
  auto* flow = app.add_subcommand("flow1d", "Particle gradient flow in 1D until steady state");
  add_common(flow);
  flow->add_option("--preset", fa.preset, "fig2-N20 | fig2-N50 | fig2-N100");
  flow->add_option("--n", fa.n, "Number of particles");
  flow->add_option("--phi", fa.phi, "Attraction kernel, e.g. abs_power(tau=1.1)");
  flow->add_option("--psi", fa.psi, "Repulsion kernel, e.g. abs_power(tau=1)");
  flow->add_option("--w", fa.w, "Datum, indicator(a,b)");
  flow->add_option("--cells", fa.cells, "Datum grid cells")->capture_default_str();
  flow->add_option("--dt", fa.dt, "Euler step (default 1e-3)");
  flow->add_option("--grad-tol", fa.grad_tol, "Steady-state gradient sup-norm (default 1e-6)");
  flow->add_option("--max-steps", fa.max_steps, "Step limit");
  flow->add_option("--init", fa.init, "from_w_sampling | uniform_box")
      ->check(CLI::IsMember({"from_w_sampling", "uniform_box"}))
      ->capture_default_str();

  Pde1dArgs pa;
  auto* pde = app.add_subcommand("pde1d", "Mean-field transport PDE in 1D");
  add_common(pde);
  pde->add_option("--preset", pa.preset, "smoothing | sharpening | uniqueness");
  pde->add_option("--phi", pa.phi, "Attraction kernel");
  pde->add_option("--psi", pa.psi, "Repulsion kernel");
  pde->add_option("--w", pa.w, "Datum, indicator(a,b)");
  pde->add_option("--f0", pa.f0, "Initial density, indicator(a,b) or w");
  pde->add_option("--cells", pa.cells, "Grid cells (default 1024)");
  pde->add_option("--dt", pa.dt, "Step cap");
  pde->add_option("--cfl", pa.cfl, "CFL number in (0,1]");
  pde->add_option("--max-time", pa.max_time, "Final time");
  pde->add_option("--steady-tol", pa.steady_tol, "L1 change per unit time that counts as steady");
  pde->add_option("--snapshots", pa.snapshots, "Snapshot times")->delimiter(',');
  pde->add_flag("--flip-velocity-sign", pa.flip, "Debug: transport in the wrong direction");

  DeblurArgs da;
  auto* deb = app.add_subcommand("deblur", "Blur a datum with the smoothing pair, then undo it with the swapped pair");
  add_common(deb);
  deb->add_option("--blur-steps", da.blur_steps, "Blur steps (default 200)");
  deb->add_option("--blur-dt", da.blur_dt, "Blur step length (default 0.01)");
  deb->add_option("--max-time", da.max_time, "Deblur final time (default 30)");
  deb->add_option("--cells", da.cells, "Grid cells (default 1024)");
  deb->add_flag("--skip-deblur", da.skip, "Only blur and write the blurred datum");

  HalftoneArgs ha;
  auto* half = app.add_subcommand("halftone", "Stipple a PGM image with a 2D particle flow");
  add_common(half);
  half->add_option("--image", ha.image, "PGM path, builtin:twotone64 or builtin:gradient64")->required();
  half->add_option("--n", ha.n, "Number of dots")->capture_default_str();
  half->add_option("--phi", ha.phi, "Attraction kernel")->capture_default_str();
  half->add_option("--psi", ha.psi, "Repulsion kernel")->capture_default_str();
  half->add_option("--dt", ha.dt, "Euler step")->capture_default_str();
  half->add_option("--max-steps", ha.max_steps, "Step limit")->capture_default_str();
  half->add_option("--grad-tol", ha.grad_tol, "Steady-state gradient sup-norm")->capture_default_str();
  half->add_option("--coarsen", ha.coarsen, "Sum 2^k x 2^k pixel blocks before the flow")->capture_default_str();
  half->add_option("--blocks", ha.blocks, "Blocks per axis in the consistency report")->capture_default_str();
  half->add_option("--canvas", ha.canvas, "Output canvas size in pixels (longer side)")->capture_default_str();
  half->add_option("--dot-radius", ha.dot_radius, "Dot radius in pixels")->capture_default_str();
  half->add_option("--margin", ha.margin, "Canvas border around the image, as a fraction of its longer side")
      ->capture_default_str();

  std::vector<std::string> only;
  bool vflip = false;
  auto* ver = app.add_subcommand("verify", "Run the invariant suites");
  ver->add_option("--only", only, "Run only these suites (gradient, remark1, lower-bound, mass, lyapunov, remark3, uniqueness)")
      ->delimiter(',');
  ver->add_flag("--flip-velocity-sign", vflip, "Debug: inject a sign error into the transport velocity");

  std::string manifest, replay_out;
  auto* rep = app.add_subcommand("replay", "Re-run a command from its manifest.json");
  rep->add_option("manifest", manifest, "Path to manifest.json")->required();
  rep->add_option("--out", replay_out, "Write outputs here instead of the recorded directory");

  std::vector<const char*> cargv{"estip"};
  for (const auto& a : args) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : usage;
  }

  try {
    if (*flow) return cmd_flow1d(fa, common, args);
    if (*pde) return cmd_pde1d(pa, common, args);
    if (*deb) return cmd_deblur(da, common, args);
    if (*half) return cmd_halftone(ha, common, args);
    if (*ver) return cmd_verify(only, vflip);
    if (*rep) return cmd_replay(manifest, replay_out);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const DatumError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return numeric;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  }
  return usage;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}
