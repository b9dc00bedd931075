#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "estip/particles.hpp"

using namespace estip;

namespace {

const Kernel abs1 = parse_kernel("abs_power(tau=1)");
const Kernel abs11 = parse_kernel("abs_power(tau=1.1)");

Grid1d unit_interval(std::size_t cells = 3000) { return indicator_1d(0.0, 1.0, Extent1d{-1.0, 2.0, cells}); }

Grid1d datum(std::size_t cells = 1024) { return indicator_1d(0.25, 0.5, Extent1d{-0.5, 1.5, cells}); }

// Independent W1 against a uniform density on [0, 1]: fine Riemann sum of
// |F_N - F| on [lo, hi].
double w1_uniform_bruteforce(std::vector<double> x, double lo, double hi) {
  std::sort(x.begin(), x.end());
  const int steps = 400000;
  const double dx = (hi - lo) / steps;
  double acc = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double y = lo + (i + 0.5) * dx;
    const double fn = static_cast<double>(std::upper_bound(x.begin(), x.end(), y) - x.begin()) / x.size();
    const double f = std::clamp(y, 0.0, 1.0);
    acc += std::abs(fn - f) * dx;
  }
  return acc;
}

}  // namespace

TEST(Quantiles, UniformInterval) {
  const Grid1d w = unit_interval();
  const auto q2 = quantile_equilibrium(w, 2);
  EXPECT_NEAR(q2[0], 0.25, 1e-12);
  EXPECT_NEAR(q2[1], 0.75, 1e-12);
  const auto q4 = quantile_equilibrium(w, 4);
  const double expect[] = {0.125, 0.375, 0.625, 0.875};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(q4[k], expect[k], 1e-12);
}

TEST(Quantiles, SingleParticleIsTheMedian) {
  const Grid1d w = datum();
  EXPECT_NEAR(quantile_equilibrium(w, 1)[0], 0.375, 1e-12);
  EXPECT_THROW(quantile_equilibrium(w, 0), ConfigError);
}

TEST(Quantiles, GradientVanishesToQuadratureError) {
  for (std::size_t n : {2, 4, 20}) {
    const Grid1d w = unit_interval(1000);
    const auto g = discrete_gradient(state_from(quantile_equilibrium(w, n)), w, abs1, abs1);
    EXPECT_LE(gradient_sup_norm(g), 2.0 * w.spacing()) << "N=" << n;
  }
}

TEST(Wasserstein, MedianParticleAgainstUniform) {
  // int_0^1 |1{x >= 0.5} - x| dx
  EXPECT_NEAR(wasserstein1_1d(std::vector<double>{0.5}, unit_interval()), 0.25, 1e-12);
}

TEST(Wasserstein, QuantilesAgainstUniform) {
  for (std::size_t n : {1, 3, 10, 40}) {
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = (2.0 * k + 1.0) / (2.0 * n);
    EXPECT_NEAR(wasserstein1_1d(x, unit_interval()), 1.0 / (4.0 * n), 1e-12) << "N=" << n;
  }
}

TEST(Wasserstein, SingleCellMass) {
  const auto geom = make_geometry_1d(Extent1d{0.0, 1.0, 100});
  std::vector<double> v(100, 0.0);
  v[37] = 1.0;
  const Grid1d f = normalize(Grid1d(geom, v));
  EXPECT_LE(wasserstein1_1d(std::vector<double>{0.375}, f), f.spacing());
}

TEST(Wasserstein, MatchesBruteForceIntegral) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.3, 1.3);
  for (int t = 0; t < 5; ++t) {
    std::vector<double> x(7);
    for (auto& v : x) v = u(rng);
    EXPECT_NEAR(wasserstein1_1d(x, unit_interval()), w1_uniform_bruteforce(x, -1.0, 2.0), 1e-5);
  }
}

TEST(Wasserstein, BetweenParticleSets) {
  EXPECT_NEAR(wasserstein1_1d(std::vector<double>{0.0, 1.0}, std::vector<double>{0.5, 1.5}), 0.5, 1e-15);
  EXPECT_EQ(wasserstein1_1d(std::vector<double>{0.2, 0.1}, std::vector<double>{0.1, 0.2}), 0.0);
}

TEST(Init, ExplicitListAndDeterminism) {
  const Box<1> box{{0.0}, {1.0}};
  const std::vector<Vec<1>> pts{{0.42}};
  const auto s = init_positions<1>(0, InitKind::explicit_list, 0, box, nullptr, &pts);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.positions[0][0], 0.42);
  const Box<2> box2{{0.0, 0.0}, {1.0, 2.0}};
  const auto a = init_positions<2>(50, InitKind::uniform_box, 7, box2);
  const auto b = init_positions<2>(50, InitKind::uniform_box, 7, box2);
  EXPECT_EQ(a.positions, b.positions);
  for (const auto& p : a.positions) {
    EXPECT_GE(p[1], 0.0);
    EXPECT_LE(p[1], 2.0);
  }
  EXPECT_THROW(init_positions<1>(0, InitKind::uniform_box, 7, box), ConfigError);
  EXPECT_THROW(init_positions<1>(3, InitKind::from_w_sampling, 7, box), ConfigError);
}

TEST(Init, SamplingFromDatumHasTheRightMean) {
  const Grid1d w = datum();
  const Box<1> box{{-0.5}, {1.5}};
  const auto s = init_positions<1>(10000, InitKind::from_w_sampling, 3, box, &w);
  double mean = 0.0;
  for (const auto& p : s.positions) {
    EXPECT_GE(p[0], 0.25 - 1e-12);
    EXPECT_LE(p[0], 0.5 + 1e-12);
    mean += p[0] / 10000.0;
  }
  EXPECT_GE(mean, 0.37);
  EXPECT_LE(mean, 0.38);
}

TEST(EulerStep, StationaryQuantiles) {
  const auto s = state_from({0.25, 0.75});
  const auto next = euler_step(s, unit_interval(), abs1, abs1, 0.1);
  EXPECT_NEAR(next.positions[0][0], 0.25, 1e-13);
  EXPECT_NEAR(next.positions[1][0], 0.75, 1e-13);
  EXPECT_NEAR(next.t, 0.1, 1e-15);
}

TEST(EulerStep, SingleParticleStep) {
  const auto next = euler_step(state_from({0.9}), unit_interval(), abs1, abs11, 0.1);
  EXPECT_NEAR(next.positions[0][0], 0.9 - 0.1 * (0.9 - 0.1), 1e-12);
}

TEST(EulerStep, ZeroStepIsIdentity) {
  const auto s = state_from({0.1, 0.6, 0.65});
  const auto next = euler_step(s, datum(), abs11, abs1, 0.0);
  EXPECT_EQ(next.positions, s.positions);
  EXPECT_THROW(euler_step(s, datum(), abs11, abs1, -1.0), ConfigError);
}

TEST(EulerStep, NonFiniteGradientNamesParticle) {
  // The attraction integral at infinity is inf - inf; the bounded sign
  // repulsion keeps particle 0 finite.
  const Kernel k = parse_kernel("abs_power(tau=1.5)");
  const auto s = state_from({0.3, std::numeric_limits<double>::infinity()});
  try {
    euler_step(s, datum(), k, abs1, 0.1);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("particle 1"), std::string::npos) << e.what();
  }
}

TEST(Flow, StartsConvergedAtQuantiles) {
  const Grid1d w = unit_interval(2000);
  const auto q = quantile_equilibrium(w, 20);
  FlowConfig cfg;
  const auto r = evolve_to_steady(state_from(q), w, abs1, abs1, cfg);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.steps, 0);
  for (std::size_t i = 0; i < q.size(); ++i) EXPECT_EQ(r.state.positions[i][0], q[i]);
}

TEST(Flow, RandomStartReachesQuantiles) {
  const Grid1d w = unit_interval(2000);
  const Box<1> box{{-0.5}, {1.5}};
  for (std::size_t n : {2, 4, 20}) {
    FlowConfig cfg;
    cfg.seed = 11;
    const auto s0 = init_positions<1>(n, InitKind::uniform_box, cfg.seed, box);
    const auto r = evolve_to_steady(s0, w, abs1, abs1, cfg);
    EXPECT_TRUE(r.converged) << "N=" << n;
    EXPECT_LE(wasserstein1_1d(coordinates(r.state), quantile_equilibrium(w, n)), 1e-3) << "N=" << n;
    EXPECT_LE(r.max_energy_increase, 1e-9);
  }
}

TEST(Flow, TraceEnergyIsNonincreasing) {
  const Grid1d w = datum();
  FlowConfig cfg;
  cfg.trace_every = 1;
  cfg.max_steps = 3000;
  const Box<1> box{{-0.5}, {1.5}};
  const auto r = evolve_to_steady(init_positions<1>(10, InitKind::from_w_sampling, 2, box, &w), w, abs11, abs1, cfg);
  ASSERT_GT(r.trace.size(), 10u);
  for (std::size_t i = 1; i < r.trace.size(); ++i)
    EXPECT_LE(r.trace[i].total - r.trace[i - 1].total, 1e-9 * (1.0 + std::abs(r.trace[i - 1].total)));
}

TEST(Flow, ArmijoHalvingKeepsEnergyMonotone) {
  const Grid1d w = datum(256);
  const Kernel k = parse_kernel("abs_power(tau=2)");
  FlowConfig cfg;
  cfg.dt = 5.0;
  cfg.max_steps = 200;
  cfg.trace_every = 1;
  const auto r = evolve_to_steady(state_from({-0.4, 0.1, 1.2, 1.4}), w, k, parse_kernel("abs_power(tau=1.5)"), cfg);
  EXPECT_GT(r.halvings, 0);
  EXPECT_LE(r.max_energy_increase, 1e-9);
}

TEST(Flow, MaxStepsIsNotAnError) {
  FlowConfig cfg;
  cfg.max_steps = 3;
  const auto r = evolve_to_steady(state_from({0.0, 1.0}), datum(), abs11, abs1, cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.steps, 3);
  EXPECT_GT(r.final_grad_sup, cfg.grad_tol);
}

TEST(Flow, WarnsForNonsmoothKernels) {
  const auto warn = flow_warnings(abs1, abs11, 1e-3, 2.0);
  ASSERT_EQ(warn.size(), 1u);
  EXPECT_NE(warn[0].find("abs_power(tau=1)"), std::string::npos);
}

TEST(Flow, PermutationEquivariance) {
  const Grid1d w = datum();
  const Box<1> box{{-0.5}, {1.5}};
  const auto s0 = init_positions<1>(15, InitKind::uniform_box, 4, box);
  std::vector<std::size_t> perm(15);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(5));
  ParticleState<1> sp;
  for (auto i : perm) sp.positions.push_back(s0.positions[i]);
  FlowConfig cfg;
  cfg.max_steps = 500;
  const auto a = evolve_to_steady(s0, w, abs11, abs1, cfg);
  const auto b = evolve_to_steady(sp, w, abs11, abs1, cfg);
  for (std::size_t j = 0; j < perm.size(); ++j) EXPECT_EQ(b.state.positions[j], a.state.positions[perm[j]]);
}

TEST(Flow, TranslationEquivariance) {
  const double shift = 0.25;
  const Grid1d w = datum();
  const Grid1d ws = indicator_1d(0.25 + shift, 0.5 + shift, Extent1d{-0.5 + shift, 1.5 + shift, 1024});
  const auto x0 = std::vector<double>{0.1, 0.3, 0.35, 0.6, 0.8, 0.9};
  std::vector<double> xs(x0);
  for (auto& x : xs) x += shift;
  FlowConfig cfg;
  const auto a = evolve_to_steady(state_from(x0), w, abs11, abs1, cfg);
  const auto b = evolve_to_steady(state_from(xs), ws, abs11, abs1, cfg);
  ASSERT_TRUE(a.converged && b.converged);
  for (std::size_t i = 0; i < x0.size(); ++i) EXPECT_NEAR(b.state.positions[i][0] - shift, a.state.positions[i][0], 1e-5);
}

TEST(Flow, SteadyStateIndependentOfSeed) {
  const Grid1d w = datum();
  const Box<1> box{{-0.5}, {1.5}};
  FlowConfig cfg;
  const auto a = evolve_to_steady(init_positions<1>(20, InitKind::from_w_sampling, 1, box, &w), w, abs11, abs1, cfg);
  const auto b = evolve_to_steady(init_positions<1>(20, InitKind::uniform_box, 99, box), w, abs11, abs1, cfg);
  ASSERT_TRUE(a.converged && b.converged);
  EXPECT_LE(wasserstein1_1d(coordinates(a.state), coordinates(b.state)), 1e-3);
}

TEST(Flow, SmoothingWidensAndSharpeningNarrows) {
  const Grid1d w = datum();
  const Box<1> box{{-0.5}, {1.5}};
  FlowConfig cfg;
  cfg.max_steps = 400000;
  const auto s0 = init_positions<1>(20, InitKind::from_w_sampling, 1, box, &w);
  const auto smooth = evolve_to_steady(s0, w, abs11, abs1, cfg);
  const auto sharp = evolve_to_steady(s0, w, abs1, abs11, cfg);
  ASSERT_TRUE(smooth.converged && sharp.converged);
  const auto xs = coordinates(smooth.state), xh = coordinates(sharp.state);
  const auto [smin, smax] = std::minmax_element(xs.begin(), xs.end());
  const auto [hmin, hmax] = std::minmax_element(xh.begin(), xh.end());
  EXPECT_LT(*smin, 0.25);
  EXPECT_GT(*smax, 0.5);
  EXPECT_GT(*hmin, *smin);
  EXPECT_LT(*hmax, *smax);
  EXPECT_LT(*hmax - *hmin, *smax - *smin);
}

TEST(Flow, AbsKernelsApproachTheDatum) {
  const Grid1d w = datum();
  const Box<1> box{{-0.5}, {1.5}};
  double prev = 1.0;
  for (std::size_t n : {20, 50, 100}) {
    FlowConfig cfg;
    const auto r = evolve_to_steady(init_positions<1>(n, InitKind::from_w_sampling, 1, box, &w), w, abs1, abs1, cfg);
    ASSERT_TRUE(r.converged);
    const double d = wasserstein1_1d(r.state, w);
    EXPECT_LE(d, 1.0 / (2.0 * n) + 2.0 * w.spacing()) << "N=" << n;
    EXPECT_LT(d, prev);
    prev = d;
  }
}
