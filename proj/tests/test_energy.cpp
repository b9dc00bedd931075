#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "estip/energy.hpp"
#include "estip/particles.hpp"

using namespace estip;

namespace {

const Kernel abs1 = parse_kernel("abs_power(tau=1)");

Grid1d unit_interval(std::size_t cells = 3000) { return indicator_1d(0.0, 1.0, Extent1d{-1.0, 2.0, cells}); }

Grid2d square_datum(std::size_t n) {
  GridGeometry<2> g;
  g.origin = {0.0, 0.0};
  g.spacing = 1.0 / static_cast<double>(n);
  g.shape = {n, n};
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto c = g.center(i);
    v[i] = 1.0 + c[0] + 0.5 * c[1] * c[1];
  }
  return normalize(Grid2d(g, v));
}

template <int Dim>
ParticleState<Dim> random_state(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  ParticleState<Dim> s;
  for (std::size_t i = 0; i < n; ++i) {
    Vec<Dim> p;
    for (auto& x : p) x = u(rng);
    s.positions.push_back(p);
  }
  return s;
}

// Central differences of the discrete energy, componentwise relative error.
template <int Dim>
double fd_gradient_error(const ParticleState<Dim>& s, const ParticleEnergy<Dim>& e, double step) {
  const auto g = e.gradient(s.positions);
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (int a = 0; a < Dim; ++a) {
      auto sp = s.positions, sm = s.positions;
      sp[i][a] += step;
      sm[i][a] -= step;
      const double fd = (e.energy(sp).total - e.energy(sm).total) / (2 * step);
      worst = std::max(worst, std::abs(fd - g[i][a]) / std::max(std::abs(g[i][a]), 1e-6));
    }
  return worst;
}

}  // namespace

TEST(DiscreteEnergy, SingleParticleClosedForm) {
  const Grid1d w = unit_interval();
  const auto r = discrete_energy(state_from({0.5}), w, abs1, abs1);
  const double h = w.spacing();
  EXPECT_NEAR(r.attraction, 0.25, h * h);
  EXPECT_EQ(r.repulsion, 0.0);
  EXPECT_NEAR(r.total, 0.25, h * h);
  // Midpoint route for the same integral.
  EXPECT_NEAR(quadrature(w, [](const Vec<1>& x) { return std::abs(0.5 - x[0]); }), 0.25, h * h);
}

TEST(DiscreteEnergy, CoincidentPairHasNoRepulsion) {
  const auto r = discrete_energy(state_from({0.3, 0.3}), unit_interval(), abs1, abs1);
  EXPECT_EQ(r.repulsion, 0.0);
}

TEST(DiscreteEnergy, DiagonalIncludedForNonzeroProfileAtOrigin) {
  const Kernel imq = parse_kernel("inverse_multiquadric(eps=1,beta=1)");
  const Grid1d w = unit_interval(300);
  // psi(0) = 1. Two coincident particles: all four pair terms equal psi(0), over 2N = 4.
  const auto r = discrete_energy(state_from({0.4, 0.4}), w, imq, imq);
  EXPECT_NEAR(r.repulsion, (4.0 * 1.0) / 4.0, 1e-15);
  const auto r1 = discrete_energy(state_from({0.4}), w, imq, imq);
  EXPECT_NEAR(r1.repulsion, 0.5, 1e-15);
}

TEST(DiscreteEnergy, TotalIsAttractionMinusRepulsion) {
  std::mt19937_64 rng(1);
  const Grid1d w = unit_interval(500);
  const Kernel p = parse_kernel("abs_power(tau=1.1)");
  for (int t = 0; t < 10; ++t) {
    const auto r = discrete_energy(random_state<1>(rng, 7, -0.5, 1.5), w, p, abs1);
    EXPECT_NEAR(r.total, r.attraction - r.repulsion, 1e-14 * std::abs(r.attraction));
  }
}

TEST(DiscreteEnergy, RejectsUnnormalizedDatum) {
  const auto geom = make_geometry_1d(Extent1d{-1.0, 2.0, 300});
  const Grid1d w = box_function_1d(0.0, 1.0, 2.0, geom);
  EXPECT_THROW(discrete_energy(state_from({0.5}), w, abs1, abs1), DatumError);
}

TEST(DiscreteEnergy, ExactAttractionMatchesMidpointForSmoothKernel) {
  const Kernel imq = parse_kernel("inverse_multiquadric(eps=0.5,beta=1)");
  const Grid1d w = indicator_1d(0.25, 0.5, Extent1d{-0.5, 1.5, 4096});
  const double h = w.spacing();
  for (double p : {-0.2, 0.3, 0.41, 0.9}) {
    const auto r = discrete_energy(state_from({p}), w, imq, imq);
    const double mid = quadrature(w, [&](const Vec<1>& x) { return imq.eval1(p - x[0]); });
    EXPECT_NEAR(r.attraction, mid, 50.0 * h * h);
  }
}

TEST(DiscreteGradient, QuantilePairIsStationary) {
  const auto g = discrete_gradient(state_from({0.25, 0.75}), unit_interval(), abs1, abs1);
  EXPECT_NEAR(g[0][0], 0.0, 1e-12);
  EXPECT_NEAR(g[1][0], 0.0, 1e-12);
}

TEST(DiscreteGradient, SingleParticleMovesTowardMedian) {
  const auto g = discrete_gradient(state_from({0.9}), unit_interval(), abs1, abs1);
  // int_0^1 sign(0.9 - x) dx = 0.8
  EXPECT_NEAR(g[0][0], 0.8, 1e-12);
}

TEST(DiscreteGradient, ReflectionSymmetry) {
  const Grid1d w = indicator_1d(-0.5, 0.5, Extent1d{-1.5, 1.5, 600});
  const Kernel p11 = parse_kernel("abs_power(tau=1.1)");
  const auto g = discrete_gradient(state_from({-0.7, -0.2, 0.2, 0.7}), w, p11, abs1);
  EXPECT_NEAR(g[0][0], -g[3][0], 1e-13);
  EXPECT_NEAR(g[1][0], -g[2][0], 1e-13);
}

TEST(DiscreteGradient, FiniteDifferences1d) {
  std::mt19937_64 rng(2);
  const Grid1d w = indicator_1d(0.25, 0.5, Extent1d{-0.5, 1.5, 512});
  for (const char* spec : {"inverse_multiquadric(eps=1,beta=1)", "abs_power(tau=1.5)"}) {
    const Kernel k = parse_kernel(spec);
    const ParticleEnergy<1> e(w, k, k);
    for (int t = 0; t < 20; ++t) EXPECT_LE(fd_gradient_error(random_state<1>(rng, 5, 0.0, 1.0), e, 1e-6), 1e-5) << spec;
  }
}

TEST(DiscreteGradient, FiniteDifferences2d) {
  std::mt19937_64 rng(3);
  const Grid2d w = square_datum(32);
  for (const char* spec : {"inverse_multiquadric(eps=1,beta=1.5)", "abs_power(tau=1.5)"}) {
    const Kernel k = parse_kernel(spec, 2);
    const ParticleEnergy<2> e(w, k, k);
    for (int t = 0; t < 20; ++t) EXPECT_LE(fd_gradient_error(random_state<2>(rng, 5, 0.0, 1.0), e, 1e-6), 1e-5) << spec;
  }
}

TEST(DiscreteGradient, PermutationEquivariance) {
  std::mt19937_64 rng(4);
  const Grid2d w = square_datum(16);
  const Kernel k = parse_kernel("abs_power(tau=1)", 2);
  const auto s = random_state<2>(rng, 12, 0.0, 1.0);
  std::vector<std::size_t> perm(s.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  ParticleState<2> sp;
  for (auto i : perm) sp.positions.push_back(s.positions[i]);
  const auto g = discrete_gradient(s, w, k, k);
  const auto gp = discrete_gradient(sp, w, k, k);
  for (std::size_t j = 0; j < perm.size(); ++j) EXPECT_EQ(gp[j], g[perm[j]]);
  EXPECT_EQ(discrete_energy(s, w, k, k).total, discrete_energy(sp, w, k, k).total);
}

TEST(AffineInvariance, GradientScalesByA) {
  std::mt19937_64 rng(5);
  const Grid1d w1 = indicator_1d(0.25, 0.5, Extent1d{-0.5, 1.5, 256});
  const Grid2d w2 = square_datum(16);
  const Kernel k1 = parse_kernel("abs_power(tau=1.5)");
  const Kernel k2 = parse_kernel("abs_power(tau=1.5)", 2);
  const AffineModification mod{2.0, 3.0, -1.0};
  for (int t = 0; t < 10; ++t) {
    const auto s1 = random_state<1>(rng, 6, 0.0, 1.0);
    const auto g0 = discrete_gradient_bivariate<1>(s1, w1, RadialBivariate<1>(k1), RadialBivariate<1>(k1));
    const auto m1 = affine_modify<1>(k1, mod);
    const auto g1 = discrete_gradient_bivariate<1>(s1, w1, m1, m1);
    for (std::size_t i = 0; i < g0.size(); ++i) EXPECT_NEAR(g1[i][0], 2.0 * g0[i][0], 1e-10);

    const auto s2 = random_state<2>(rng, 6, 0.0, 1.0);
    const auto h0 = discrete_gradient_bivariate<2>(s2, w2, RadialBivariate<2>(k2), RadialBivariate<2>(k2));
    const auto m2 = affine_modify<2>(k2, mod);
    const auto h1 = discrete_gradient_bivariate<2>(s2, w2, m2, m2);
    for (std::size_t i = 0; i < h0.size(); ++i)
      for (int a = 0; a < 2; ++a) EXPECT_NEAR(h1[i][a], 2.0 * h0[i][a], 1e-10);
  }
}

TEST(AffineInvariance, EnergyShiftIsConfigurationIndependent) {
  std::mt19937_64 rng(6);
  const Grid1d w = indicator_1d(0.25, 0.5, Extent1d{-0.5, 1.5, 256});
  const Kernel k = parse_kernel("abs_power(tau=1.5)");
  const RadialBivariate<1> base(k);
  const auto mod = affine_modify<1>(k, {2.0, 3.0, -1.0});
  const auto ref = random_state<1>(rng, 6, 0.0, 1.0);
  const double c = discrete_energy_bivariate<1>(ref, w, mod, mod).total - 2.0 * discrete_energy_bivariate<1>(ref, w, base, base).total;
  for (int t = 0; t < 10; ++t) {
    const auto s = random_state<1>(rng, 6, -0.5, 1.5);
    const double d = discrete_energy_bivariate<1>(s, w, mod, mod).total - 2.0 * discrete_energy_bivariate<1>(s, w, base, base).total;
    EXPECT_NEAR(d, c, 1e-10);
  }
}

TEST(AffineInvariance, RadialBivariateMatchesExactRouteToQuadratureOrder) {
  const Grid1d w = indicator_1d(0.25, 0.5, Extent1d{-0.5, 1.5, 2048});
  const Kernel k = parse_kernel("abs_power(tau=1.5)");
  const auto s = state_from({0.1, 0.33, 0.6});
  const auto a = discrete_gradient(s, w, k, k);
  const auto b = discrete_gradient_bivariate<1>(s, w, RadialBivariate<1>(k), RadialBivariate<1>(k));
  const double h = w.spacing();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i][0], b[i][0], 10.0 * h * h);
}

TEST(ContinuousEnergy, AttractionTwiceRepulsionAtDatum) {
  const Grid1d w = indicator_1d(0.25, 0.5, Extent1d{-0.5, 1.5, 512});
  const Kernel k = parse_kernel("abs_power(tau=1.1)");
  const auto r = continuous_energy(w, w, k, k);
  EXPECT_NEAR(r.attraction, 2.0 * r.repulsion, 1e-13);
  EXPECT_NEAR(r.total, 0.5 * r.attraction, 1e-13);
}

TEST(ContinuousEnergy, UniformClosedForm) {
  const Grid1d w = indicator_1d(0.0, 1.0, Extent1d{-1.0, 2.0, 1500});
  const auto r = continuous_energy(w, w, abs1, abs1);
  // (1/2) int int |p - x| = 1/6; the midpoint double sum is low by h^2/6.
  EXPECT_NEAR(r.total, 1.0 / 6.0, w.spacing());
  const double h = w.spacing();
  EXPECT_NEAR(r.total, 0.5 * (1.0 - h * h) / 3.0, 1e-12);
}

TEST(ContinuousEnergy, FftAgreesWithDirectSum) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Grid1d w = indicator_1d(0.25, 0.5, Extent1d{-0.5, 1.5, 400});
  std::vector<double> v(w.size(), 0.0);
  for (std::size_t i = 50; i < 350; ++i) v[i] = u(rng);
  const Grid1d f = normalize(Grid1d(w.geometry(), v));
  for (const char* spec : {"abs_power(tau=1.1)", "inverse_multiquadric(eps=0.3,beta=1)", "abs_power(tau=0.5)"}) {
    const Kernel k = parse_kernel(spec);
    const auto a = continuous_energy(f, w, k, abs1, ConvolutionPath::fft);
    const auto b = continuous_energy(f, w, k, abs1, ConvolutionPath::direct);
    EXPECT_NEAR(a.attraction, b.attraction, 1e-10) << spec;
    EXPECT_NEAR(a.repulsion, b.repulsion, 1e-10) << spec;
  }
}

TEST(ContinuousEnergy, MonteCarloCrossCheck) {
  const Grid1d w = indicator_1d(0.25, 0.5, Extent1d{-0.5, 1.5, 1024});
  const Grid1d f = indicator_1d(0.3, 0.9, w.geometry());
  const Kernel p11 = parse_kernel("abs_power(tau=1.1)");
  const double target = continuous_energy(f, w, p11, abs1).total;
  const auto cdf = cumulative_1d(f);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n : {500, 2000}) {
    std::vector<double> x(n);
    for (auto& v : x) v = inverse_cdf_1d(f, cdf, u(rng));
    const double e = empirical_energy(state_from(x), w, p11, abs1);
    EXPECT_LE(std::abs(e - target), 3.0 / std::sqrt(static_cast<double>(n))) << "N=" << n;
  }
}

TEST(ContinuousEnergy, GridMismatch) {
  const Grid1d a = indicator_1d(0.25, 0.5, Extent1d{-0.5, 1.5, 256});
  const Grid1d b = indicator_1d(0.25, 0.5, Extent1d{-0.5, 1.5, 512});
  EXPECT_THROW(continuous_energy(a, b, abs1, abs1), DatumError);
}

TEST(LowerBound, ClosedForms) {
  const Grid1d w = indicator_1d(0.0, 1.0, Extent1d{-1.0, 2.0, 3000});
  const double h = w.spacing();
  EXPECT_NEAR(energy_lower_bound(w, abs1), -0.5, h * h);
  // int_0^1 sqrt(x) dx = 2/3; the midpoint error near the root singularity is O(h^1.5)
  EXPECT_NEAR(energy_lower_bound(w, parse_kernel("abs_power(tau=0.5)")), -2.0 / 3.0, std::pow(h, 1.5));
}

TEST(LowerBound, PointMassAtOrigin) {
  const auto geom = make_geometry_1d(Extent1d{-0.5, 0.5, 1001});
  std::vector<double> v(1001, 0.0);
  v[500] = 1.0;
  const Grid1d w = normalize(Grid1d(geom, v));
  EXPECT_NEAR(energy_lower_bound(w, abs1), 0.0, 1e-12);
}

TEST(LowerBound, RejectsConvexProfileNamingTheSamples) {
  const Grid1d w = indicator_1d(0.0, 1.0, Extent1d{-1.0, 2.0, 300});
  try {
    energy_lower_bound(w, parse_kernel("abs_power(tau=1.5)"));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("not concave"), std::string::npos);
    EXPECT_NE(msg.find("s="), std::string::npos);
  }
  EXPECT_THROW(energy_lower_bound(w, parse_kernel("inverse_multiquadric(beta=1)")), ConfigError);
}

TEST(LowerBound, HoldsForRandomDensities) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto geom = make_geometry_1d(Extent1d{-0.5, 1.5, 128});
  const Grid1d w = indicator_1d(0.25, 0.5, geom);
  for (const char* spec : {"abs_power(tau=1)", "abs_power(tau=0.5)"}) {
    const Kernel k = parse_kernel(spec);
    const double bound = energy_lower_bound(w, k);
    for (int t = 0; t < 100; ++t) {
      std::vector<double> v(geom.size());
      for (auto& x : v) x = u(rng) * (u(rng) < 0.3 ? 10.0 : 1.0);
      const Grid1d f = normalize(Grid1d(geom, v));
      EXPECT_GE(continuous_energy(f, w, k, k).total, bound - 1e-8) << spec;
    }
  }
}

TEST(Unboundedness, CubicTwoPointWitness) {
  const Grid1d w = indicator_1d(-0.5, 0.5, Extent1d{-1.0, 1.0, 400});
  const Kernel cubic = parse_kernel("abs_power(tau=3)");
  double prev = std::numeric_limits<double>::infinity();
  for (double q : {4.0, 8.0, 16.0, 32.0, 64.0}) {
    const double e = empirical_energy(state_from({-q, q}), w, cubic, cubic);
    EXPECT_LT(e, prev) << "q=" << q;
    prev = e;
    if (q == 64.0) {
      EXPECT_NEAR(e / (q * q * q), 1.0 - 8.0 / 4.0, 0.1);
    }
  }
}
