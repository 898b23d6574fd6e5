// SPDX-License-Identifier: Apache-2.0
#include <kdmc/initial_density.hpp>
#include <kdmc/sampling.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace kdmc;

namespace {

// Composite Simpson quadrature with many panels, independent of the table.
template <class F>
double simpson(F f, double a, double b, int panels = 20000) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

double canonical_rho(double x) {
  return 1.0 + std::sin(2.0 * std::numbers::pi * x) / (2.0 * std::numbers::pi);
}

double ks_statistic(std::vector<double> xs, auto cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double F = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - F, F - i / n});
  }
  return d;
}

}  // namespace

TEST(InitialDensity, UniformDensityGivesUniformPositions) {
  InitialDensity rho = InitialDensity::uniform(2.0, 1.0);
  EXPECT_NEAR(rho.total_mass(), 2.0, 1e-12);
  RngStream s(1, 0);
  std::vector<double> xs(100000);
  for (double& x : xs) x = rho.sample(s.uniform_open_closed());
  double d = ks_statistic(xs, [](double x) { return x; });
  EXPECT_LT(d, 1.63 / std::sqrt(100000.0));
}

TEST(InitialDensity, CanonicalCdfAtHalfMatchesQuadrature) {
  InitialDensity rho = InitialDensity::canonical();
  const double expected = simpson(canonical_rho, 0.0, 0.5) / simpson(canonical_rho, 0.0, 1.0);
  EXPECT_NEAR(expected, 0.5 + 1.0 / (2.0 * std::numbers::pi * std::numbers::pi), 1e-12);
  EXPECT_NEAR(rho.cdf(0.5), expected, 1e-10);
  EXPECT_NEAR(rho.total_mass(), 1.0, 1e-12);

  RngStream s(9, 1);
  const int n = 200000;
  int below = 0;
  std::vector<double> xs(n);
  for (double& x : xs) {
    x = rho.sample(s.uniform_open_closed());
    below += x < 0.5;
  }
  const double p = expected;
  EXPECT_NEAR(static_cast<double>(below) / n, p, 4.0 * std::sqrt(p * (1 - p) / n));
  auto cdf = [](double x) {
    return x + (1.0 - std::cos(2.0 * std::numbers::pi * x)) /
                   (4.0 * std::numbers::pi * std::numbers::pi);
  };
  EXPECT_LT(ks_statistic(xs, cdf), 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST(InitialDensity, InverseCdfEndpoints) {
  InitialDensity rho = InitialDensity::canonical();
  EXPECT_EQ(rho.sample(0.0), 0.0);
  EXPECT_EQ(rho.sample(1.0), 1.0);
  EXPECT_LT(rho.sample(1.0 - 1e-16), 1.0 + 1e-12);
  EXPECT_GT(rho.sample(1e-12), 0.0);
}

TEST(InitialDensity, InverseCdfIsMonotoneAndInvertsCdf) {
  InitialDensity rho = InitialDensity::canonical(2.0);
  double prev = 0.0;
  for (int k = 1; k < 1000; ++k) {
    double u = k / 1000.0;
    double x = rho.sample(u);
    ASSERT_GE(x, prev);
    EXPECT_NEAR(rho.cdf(x), u, 1e-9);
    prev = x;
  }
}

TEST(InitialDensity, NegativeDensityIsAConfigError) {
  EXPECT_THROW(InitialDensity([](double x) { return x - 0.5; }, 1.0), ConfigError);
  EXPECT_THROW(InitialDensity([](double) { return 0.0; }, 1.0), ConfigError);
  EXPECT_THROW(InitialDensity::uniform(1.0, 0.0), ConfigError);
}

TEST(InitialDensity, CellAveragesConserveMass) {
  InitialDensity rho = InitialDensity::canonical();
  PeriodicGrid g{100, 1.0};
  auto avg = rho.cell_averages(g);
  double s = 0.0;
  for (double v : avg) s += v * g.dx();
  EXPECT_NEAR(s, rho.total_mass(), 1e-14);
  for (std::size_t j = 0; j < g.cells; ++j) {
    double exact = simpson(canonical_rho, g.lower_face(j), g.lower_face(j) + g.dx(), 200) / g.dx();
    EXPECT_NEAR(avg[j], exact, 1e-10);
  }
  EXPECT_THROW(rho.cell_averages(PeriodicGrid{10, 2.0}), DimensionError);
}
