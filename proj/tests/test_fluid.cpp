// SPDX-License-Identifier: Apache-2.0
#include <kdmc/background.hpp>
#include <kdmc/errors.hpp>
#include <kdmc/fluid.hpp>
#include <kdmc/initial_density.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace kdmc;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

DensityField sampled(const PeriodicGrid& g, auto f) {
  DensityField rho(g);
  for (std::size_t j = 0; j < g.cells; ++j) rho.values[j] = f(g.center(j));
  return rho;
}

// Closed-form solution of d_t rho + u d_x rho = k d_xx rho for the canonical
// initial profile on the unit interval.
double closed_form(double x, double t, double u, double k) {
  return 1.0 + std::exp(-k * two_pi * two_pi * t) * std::sin(two_pi * (x - u * t)) / two_pi;
}

double max_error(const DensityField& rho, double t, double u, double k) {
  double e = 0.0;
  for (std::size_t j = 0; j < rho.grid.cells; ++j)
    e = std::max(e, std::abs(rho.values[j] - closed_form(rho.grid.center(j), t, u, k)));
  return e;
}

}  // namespace

TEST(FluidStep, UniformStateIsSteady) {
  auto bg = ConstantBackground::scaled(3.0, 2.0, 5.0);
  PeriodicGrid g{64, 1.0};
  DensityField rho = sampled(g, [](double) { return 1.7; });
  FluidOperator op(g, bg);
  DensityField out = fluid_step(rho, 0.5 * op.stability_bound(), bg);
  for (double v : out.values) EXPECT_EQ(v, 1.7);
}

TEST(FluidStep, SinusoidDecaysAtTheHeatEquationRate) {
  auto bg = ConstantBackground::scaled(0.0, 1.0, 1.0);  // D sigma^2 = 1
  PeriodicGrid g{200, 1.0};
  DensityField rho = sampled(g, [](double x) { return std::sin(two_pi * x); });
  FluidOperator op(g, bg);
  const double dt = 0.5 * op.stability_bound();
  op.step(rho, dt);
  const double factor = std::exp(-two_pi * two_pi * dt);
  for (std::size_t j = 0; j < g.cells; ++j) {
    double expected = factor * std::sin(two_pi * g.center(j));
    EXPECT_NEAR(rho.values[j], expected, 10.0 * g.dx() * g.dx() * two_pi * two_pi * dt);
  }
}

TEST(FluidStep, ConservesMassToRoundoff) {
  CanonicalBackground bg(0.003);
  PeriodicGrid g{100, 1.0};
  InitialDensity rho0 = InitialDensity::canonical();
  DensityField rho(g, rho0.cell_averages(g));
  rho.values[17] += 40.0;  // a sharp bump
  FluidOperator op(g, bg);
  for (int s = 0; s < 200; ++s) {
    const double before = rho.mass();
    op.step(rho, fluid_safety_factor * op.stability_bound());
    EXPECT_LT(std::abs(rho.mass() - before) / before, 1e-14);
  }
}

TEST(FluidStep, RejectsUnstableTimeStep) {
  CanonicalBackground bg(0.01);
  PeriodicGrid g{100, 1.0};
  FluidOperator op(g, bg);
  DensityField rho(g, std::vector<double>(100, 1.0));
  const double bound = op.stability_bound();
  try {
    op.step(rho, 1.5 * bound);
    FAIL() << "expected a stability error";
  } catch (const StabilityError& e) {
    EXPECT_DOUBLE_EQ(e.admissible(), bound);
    EXPECT_DOUBLE_EQ(e.requested(), 1.5 * bound);
  }
  EXPECT_NO_THROW(op.step(rho, bound));
}

TEST(FluidStep, StabilityBoundIsAtLeastAsStrictAsTheSeparateLimits) {
  CanonicalBackground bg(0.003);
  PeriodicGrid g{100, 1.0};
  FluidOperator op(g, bg);
  double max_u = 0.0, max_k = 0.0;
  for (int k = 0; k < 10000; ++k) {
    double x = k / 10000.0;
    max_u = std::max(max_u, std::abs(bg.mean_velocity(x)));
    max_k = std::max(max_k, bg.sigma_p2(x, true) / bg.collision_rate(x, true));
  }
  const double separate = std::min(g.dx() / max_u, g.dx() * g.dx() / (2.0 * max_k));
  EXPECT_LE(op.stability_bound(), separate * 1.05);
  EXPECT_GT(op.stability_bound(), 0.3 * separate);
}

TEST(FluidStep, KeepsNonnegativeDensitiesNonnegative) {
  CanonicalBackground bg(0.003);
  PeriodicGrid g{100, 1.0};
  DensityField rho(g);
  rho.values[0] = 100.0;
  rho.values[50] = 100.0;
  FluidSolution sol = fluid_solve(rho, 1e-4, bg);
  double mx = *std::max_element(sol.final_density.values.begin(), sol.final_density.values.end());
  for (double v : sol.final_density.values) EXPECT_GE(v, -1e-12 * mx);
}

TEST(FluidSolve, ZeroHorizonReturnsInitialState) {
  CanonicalBackground bg(0.01);
  PeriodicGrid g{50, 1.0};
  DensityField rho = sampled(g, [](double x) { return 1.0 + x; });
  FluidSolution sol = fluid_solve(rho, 0.0, bg);
  EXPECT_EQ(sol.final_density.values, rho.values);
  for (double v : sol.integrated.values) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(sol.steps, 0u);
  EXPECT_THROW(fluid_solve(rho, -1.0, bg), NumericalError);
}

TEST(FluidSolve, TimeIntegralConservesMass) {
  CanonicalBackground bg(0.0027);
  PeriodicGrid g{100, 1.0};
  DensityField rho(g, InitialDensity::canonical().cell_averages(g));
  const double T = 1e-3;
  FluidSolution sol = fluid_solve(rho, T, bg);
  EXPECT_LT(std::abs(sol.integrated.mass() - T * rho.mass()) / (T * rho.mass()), 1e-8);
  EXPECT_GT(sol.steps, 1u);
}

TEST(FluidSolve, DiffusionConvergesAtSecondOrder) {
  auto bg = ConstantBackground::scaled(0.0, 1.0, 1.0);
  const double T = 0.025;
  auto error_on = [&](std::size_t cells) {
    PeriodicGrid g{cells, 1.0};
    DensityField rho = sampled(g, [](double x) { return closed_form(x, 0.0, 0.0, 1.0); });
    return max_error(fluid_solve(rho, T, bg).final_density, T, 0.0, 1.0);
  };
  const double e100 = error_on(100), e200 = error_on(200), e400 = error_on(400);
  EXPECT_GE(e100 / e200, 3.4);
  EXPECT_LE(e100 / e200, 4.6);
  EXPECT_GE(e200 / e400, 3.4);
  EXPECT_LE(e200 / e400, 4.6);
  EXPECT_LT(e100, 1e-3);
}

TEST(FluidSolve, AdvectionDiffusionApproachesClosedForm) {
  auto bg = ConstantBackground::scaled(2.0, 0.5, 1.0);  // u = 2, D sigma^2 = 0.5
  const double T = 0.05;
  auto error_on = [&](std::size_t cells) {
    PeriodicGrid g{cells, 1.0};
    DensityField rho = sampled(g, [](double x) { return closed_form(x, 0.0, 2.0, 0.5); });
    return max_error(fluid_solve(rho, T, bg).final_density, T, 2.0, 0.5);
  };
  const double e100 = error_on(100), e400 = error_on(400);
  EXPECT_LT(e400, e100 / 3.0);  // upwind advection: at least first order
  EXPECT_LT(e400, 5e-3);
}

TEST(FluidMoments, UniformDensityOnConstantBackground) {
  auto bg = ConstantBackground::scaled(3.0, 4.0, 2.0);
  PeriodicGrid g{20, 1.0};
  TimeIntegratedDensity rb{g, std::vector<double>(20, 0.5), 1.0};
  MomentField m = fluid_moments(rb, bg);
  for (std::size_t j = 0; j < 20; ++j) {
    EXPECT_DOUBLE_EQ(m.m0[j], 0.5);
    EXPECT_DOUBLE_EQ(m.m1[j], 1.5);
    EXPECT_DOUBLE_EQ(m.m2[j], 0.5 * (9.0 + 4.0) * 0.5);
  }
}

TEST(FluidMoments, CanonicalFirstMomentMatchesFineGridOracle) {
  const double eps = 0.0027, T = 1e-3;
  CanonicalBackground bg(eps);
  PeriodicGrid g{100, 1.0};
  auto rho0 = [](double x) { return 1.0 + std::sin(two_pi * x) / two_pi; };
  TimeIntegratedDensity rb{g, {}, T};
  for (std::size_t j = 0; j < g.cells; ++j) rb.values.push_back(T * rho0(g.center(j)));
  MomentField m = fluid_moments(rb, bg);

  // Independent evaluation of the formulas at the first cell centre, with the
  // exact derivative replaced by a very fine central difference.
  const double scale = 1e-7 / (eps * eps);
  auto s2 = [&](double x) { return 1.6e-19 * (5.5 + 4.5 * std::cos(two_pi * x)) / 1.67e-27 * scale; };
  auto rate = [&](double x) { return 3.2e6 * std::sqrt((5.5 + 4.5 * std::cos(two_pi * x)) / 0.026) * scale; };
  auto u = [](double x) { return 100.0 + std::sin(3.0 * two_pi * x) / (3.0 * two_pi); };
  const double x = g.center(0), h = 1e-6;
  auto g1 = [&](double y) { return s2(y) * T * rho0(y); };
  auto g2 = [&](double y) { return u(y) * g1(y); };
  double m1_exact = u(x) * T * rho0(x) - (g1(x + h) - g1(x - h)) / (2 * h) / rate(x);
  double m2_exact = 0.5 * (u(x) * u(x) + s2(x)) * T * rho0(x) -
                    (g2(x + h) - g2(x - h)) / (2 * h) / rate(x);
  // central differences on the grid are O(dx^2) away from the exact derivative
  EXPECT_NEAR(m.m1[0], m1_exact, 2e-3 * std::abs(m1_exact));
  EXPECT_NEAR(m.m2[0], m2_exact, 2e-3 * std::abs(m2_exact));

  // same formula with the grid's own central difference: agreement to roundoff
  const double dx = g.dx();
  double m1_grid = u(x) * T * rho0(x) - (g1(x + dx) - g1(x - dx)) / (2 * dx) / rate(x);
  EXPECT_NEAR(m.m1[0], m1_grid, 1e-9 * std::abs(m1_grid));
}

TEST(FluidMoments, VelocitySignFlipOnlyFlipsTheAdvectivePart) {
  // even profiles of sigma^2 and R about x = 1/2, constant u of either sign
  auto s2 = [](double x) { return 2.0 + std::cos(two_pi * x); };
  auto r = [](double x) { return 3.0 + std::cos(two_pi * x); };
  ProfileBackground plus([](double) { return 1.5; }, s2, r, std::sqrt(1e-7));
  ProfileBackground minus([](double) { return -1.5; }, s2, r, std::sqrt(1e-7));
  PeriodicGrid g{40, 1.0};
  TimeIntegratedDensity rb{g, {}, 1.0};
  for (std::size_t j = 0; j < g.cells; ++j) rb.values.push_back(1.0 + 0.3 * std::sin(two_pi * g.center(j)));
  MomentField a = fluid_moments(rb, plus), b = fluid_moments(rb, minus);
  for (std::size_t j = 0; j < g.cells; ++j) {
    const double adv = 1.5 * rb.values[j];
    EXPECT_NEAR(a.m1[j] - adv, b.m1[j] + adv, 1e-12);
  }
}

TEST(FluidMoments, GridMismatchIsADimensionError) {
  CanonicalBackground bg(0.01);
  TimeIntegratedDensity rb{PeriodicGrid{10, 1.0}, std::vector<double>(10, 1.0), 1.0};
  EXPECT_THROW(fluid_moments(rb, bg, PeriodicGrid{20, 1.0}), DimensionError);
  EXPECT_THROW(FluidOperator(PeriodicGrid{10, 2.0}, bg), DimensionError);
}

TEST(RunFluid, MassIdentityOnCanonicalCase) {
  CanonicalBackground bg(0.0027);
  FluidMethodOutput out = run_fluid(bg, InitialDensity::canonical(), PeriodicGrid{100, 1.0}, 1e-3);
  EXPECT_NEAR(out.moments.integral_m0(), 1e-3, 1e-3 * 1e-10);
  EXPECT_THROW(run_fluid(bg, InitialDensity::canonical(), PeriodicGrid{100, 1.0}, 0.0), ConfigError);
}
