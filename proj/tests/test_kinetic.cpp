// SPDX-License-Identifier: Apache-2.0
#include <kdmc/background.hpp>
#include <kdmc/kinetic.hpp>

#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace kdmc;

TEST(KineticParticle, ScriptedFlightsAndCollision) {
  auto bg = ConstantBackground::scaled(0.0, 4.0, 10.0);
  MomentField f(PeriodicGrid{10, 1.0});
  test_util::ScriptedSampler s;
  s.exponentials = {0.02, 0.5};  // collide at t = 0.02, then run past t_final
  s.uniforms = {0.3};            // accepted: 0.3 * R_max <= R
  s.normals = {-1.0};            // new velocity 0 + 2 * (-1)
  ParticleState st{0.05, 1.0, 0.5};
  auto ops = simulate_kinetic_particle(bg, st, 0.1, s, f);
  EXPECT_EQ(ops, 2u);
  // first flight: [0.05, 0.07] at v = 1; second: 0.08 s at v = -2 from 0.07
  EXPECT_NEAR(f.integral_m0(), 0.5 * 0.1, 1e-15);
  MomentField expected(PeriodicGrid{10, 1.0});
  deposit_track(expected, 0.05, 1.0, 0.02, 0.5);
  deposit_track(expected, 0.07, -2.0, 0.08, 0.5);
  for (std::size_t j = 0; j < 10; ++j) {
    EXPECT_NEAR(f.m0[j], expected.m0[j], 1e-14);
    EXPECT_NEAR(f.m1[j], expected.m1[j], 1e-14);
  }
}

TEST(KineticParticle, RejectedEventKeepsVelocity) {
  CanonicalBackground bg(1.0);
  const double bound = bg.collision_rate_bound();
  const double x = 0.5;  // coldest point, acceptance probability sqrt(1/10)
  MomentField f(PeriodicGrid{10, 1.0});
  test_util::ScriptedSampler s;
  s.exponentials = {0.0, 10.0};
  s.uniforms = {0.9};  // 0.9 R_max > R(0.5): null event
  ParticleState st{x, 0.0, 1.0};
  auto ops = simulate_kinetic_particle(bg, st, 0.1, s, f);
  EXPECT_EQ(ops, 1u);  // only the final flight counts
  EXPECT_TRUE(s.normals.empty());
  EXPECT_LT(bg.collision_rate(x, true), 0.9 * bound);
}

TEST(RunKinetic, MassIdentityHolds) {
  CanonicalBackground bg(0.1);
  SimulationParameters p{20000, 1e-3, PeriodicGrid{100, 1.0}, 7, 1};
  KineticOutput out = run_kinetic(bg, InitialDensity::canonical(), p);
  const double expected = p.final_time * out.total_mass;
  EXPECT_LT(std::abs(out.moments.integral_m0() - expected) / expected, 1e-10);
  for (double v : out.moments.m0) EXPECT_GE(v, 0.0);
}

TEST(RunKinetic, OperationCountMatchesCollisionRate) {
  auto bg = ConstantBackground::scaled(0.0, 100.0, 10000.0);
  const std::size_t I = 20000;
  SimulationParameters p{I, 1e-2, PeriodicGrid{50, 1.0}, 3, 1};
  KineticOutput out = run_kinetic(bg, InitialDensity::canonical(), p);
  // I * R * t collisions plus one final flight per particle
  const double expected = I * 10000.0 * 1e-2;
  EXPECT_NEAR(static_cast<double>(out.operations) / expected, 1.0, 0.05);
}

TEST(RunKinetic, MeanFluxVanishesForSymmetricMaxwellian) {
  auto bg = ConstantBackground::scaled(0.0, 1.0, 50.0);
  const int groups = 20;
  std::vector<double> flux(groups);
  for (int g = 0; g < groups; ++g) {
    SimulationParameters p{2000, 0.1, PeriodicGrid{20, 1.0}, 100 + static_cast<std::uint64_t>(g), 1};
    KineticOutput out = run_kinetic(bg, InitialDensity::canonical(), p);
    double s = 0.0;
    for (double v : out.moments.m1) s += v * p.grid.dx();
    flux[g] = s;
  }
  double mean = 0.0, var = 0.0;
  for (double v : flux) mean += v / groups;
  for (double v : flux) var += (v - mean) * (v - mean) / (groups - 1);
  const double se = std::sqrt(var / groups);
  EXPECT_LT(std::abs(mean), 3.0 * se);
  EXPECT_GT(se, 0.0);
}

TEST(RunKinetic, WorkerCountDoesNotChangeResults) {
  CanonicalBackground bg(0.3);
  SimulationParameters p{3000, 1e-3, PeriodicGrid{30, 1.0}, 11, 1};
  KineticOutput a = run_kinetic(bg, InitialDensity::canonical(), p);
  p.workers = 4;
  KineticOutput b = run_kinetic(bg, InitialDensity::canonical(), p);
  EXPECT_EQ(a.moments, b.moments);
  EXPECT_EQ(a.operations, b.operations);
}

TEST(RunKinetic, InvalidConfigurationIsRejected) {
  CanonicalBackground bg(1.0);
  auto rho0 = InitialDensity::canonical();
  EXPECT_THROW(run_kinetic(bg, rho0, SimulationParameters{0, 1e-3, {}, 1, 1}), ConfigError);
  EXPECT_THROW(run_kinetic(bg, rho0, SimulationParameters{10, 0.0, {}, 1, 1}), ConfigError);
  EXPECT_THROW(run_kinetic(bg, rho0, SimulationParameters{10, 1e-3, PeriodicGrid{100, 2.0}, 1, 1}),
               ConfigError);
}

// A particle that barely moves sees a fixed rate R(x); its number of real
// collisions over [0, t] must then average R(x) t even though tentative
// events arrive at the larger majorant.
TEST(KineticParticle, ThinnedCollisionsFollowTheLocalRate) {
  ProfileBackground bg([](double) { return 0.0; }, [](double) { return 1e-20; },
                       [](double x) { return 1.0 + x; }, std::sqrt(1e-7));
  ASSERT_GT(bg.collision_rate_bound(), 1.9);
  const double x = 0.5, t = 2.0;
  const int n = 20000;
  double collisions = 0.0;
  MomentField f(PeriodicGrid{10, 1.0});
  for (int i = 0; i < n; ++i) {
    StreamSampler s(5, static_cast<std::uint64_t>(i));
    collisions += static_cast<double>(simulate_kinetic_particle(bg, ParticleState{x, 0.0, 1.0}, t, s, f) - 1);
  }
  const double expected = 1.5 * t;
  EXPECT_NEAR(collisions / n, expected, 4.0 * std::sqrt(expected / n));
}
