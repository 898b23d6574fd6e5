// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "kdmc/background.hpp"
#include "kdmc/errors.hpp"
#include "kdmc/grid.hpp"
#include "kdmc/initial_density.hpp"

namespace kdmc {

struct DensityField {
  PeriodicGrid grid;
  std::vector<double> values;

  DensityField() = default;
  explicit DensityField(const PeriodicGrid& g) : grid(g), values(g.cells, 0.0) {}
  DensityField(const PeriodicGrid& g, std::vector<double> v)
      : grid(g), values(std::move(v)) {
    if (values.size() != grid.cells)
      throw DimensionError("density values do not match the grid");
  }

  double mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.dx();
  }
};

/// rho_bar[j] = int_0^T rho(x_j, t) dt.
struct TimeIntegratedDensity {
  PeriodicGrid grid;
  std::vector<double> values;
  double horizon = 0.0;

  double mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.dx();
  }
};

struct FluidSolution {
  TimeIntegratedDensity integrated;
  DensityField final_density;
  std::size_t steps = 0;
};

/// Safety factor applied to the stability bound when substepping.
inline constexpr double fluid_safety_factor = 0.9;

/// Explicit conservative finite-volume discretisation of
///   d_t rho + d_x(u rho) - d_x( D d_x(sigma^2 rho) ) = 0,  D = 1/R,
/// with first-order upwind advection, central differences of sigma^2 rho
/// and D at faces by the harmonic mean of the neighbouring cell values.
class FluidOperator {
 public:
  template <Background B>
  FluidOperator(const PeriodicGrid& grid, const B& bg) : grid_(grid) {
    const double length = bg.domain_length();
    if (std::abs(grid.length - length) > 1e-12 * length)
      throw DimensionError("fluid grid does not match the background domain");
    if (grid.cells < 2) throw DimensionError("fluid grid needs >= 2 cells");
    const std::size_t n = grid.cells;
    sigma2_.resize(n);
    face_velocity_.resize(n);
    face_diffusivity_.resize(n);
    std::vector<double> inv_rate(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = grid.center(j);
      sigma2_[j] = bg.sigma_p2(x, true);
      const double r = bg.collision_rate(x, true);
      if (r == 0.0) throw NumericalError("collision rate vanishes on the grid");
      inv_rate[j] = 1.0 / r;
      face_velocity_[j] = bg.mean_velocity(grid.lower_face(j) + grid.dx());
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double a = inv_rate[j];
      const double b = inv_rate[j + 1 == n ? 0 : j + 1];
      face_diffusivity_[j] = 2.0 * a * b / (a + b);
    }

    const double dx = grid.dx();
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t left = j == 0 ? n - 1 : j - 1;
      const double outflow = std::max(face_velocity_[j], 0.0) +
                             std::max(-face_velocity_[left], 0.0);
      const double diffusion =
          sigma2_[j] * (face_diffusivity_[j] + face_diffusivity_[left]);
      worst = std::max(worst, outflow / dx + diffusion / (dx * dx));
    }
    bound_ = worst > 0.0 ? 1.0 / worst : std::numeric_limits<double>::infinity();
  }

  const PeriodicGrid& grid() const { return grid_; }

  /// Largest dt keeping every update coefficient nonnegative.
  double stability_bound() const { return bound_; }

  void step(DensityField& rho, double dt) const {
    require_same_grid(rho.grid, grid_, "fluid step");
    if (dt > bound_ * (1.0 + 1e-12)) throw StabilityError(dt, bound_);
    const std::size_t n = grid_.cells;
    const double dx = grid_.dx();
    std::vector<double> flux(n);
    const std::vector<double>& r = rho.values;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t right = j + 1 == n ? 0 : j + 1;
      const double u = face_velocity_[j];
      const double advective = u > 0.0 ? u * r[j] : u * r[right];
      const double gradient = (sigma2_[right] * r[right] - sigma2_[j] * r[j]) / dx;
      flux[j] = advective - face_diffusivity_[j] * gradient;
    }
    const double c = dt / dx;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t left = j == 0 ? n - 1 : j - 1;
      rho.values[j] -= c * (flux[j] - flux[left]);
    }
  }

 private:
  PeriodicGrid grid_;
  std::vector<double> sigma2_;
  std::vector<double> face_velocity_;     // at face j+1/2
  std::vector<double> face_diffusivity_;  // 1/R at face j+1/2
  double bound_ = 0.0;
};

template <Background B>
DensityField fluid_step(const DensityField& rho, double dt, const B& bg) {
  FluidOperator op(rho.grid, bg);
  DensityField out = rho;
  op.step(out, dt);
  return out;
}

/// Evolve rho0 over [0, horizon] in equal substeps no larger than
/// fluid_safety_factor times the stability bound, accumulating the time
/// integral with the trapezoidal rule.
inline FluidSolution fluid_solve(const FluidOperator& op,
                                 const DensityField& rho0, double horizon) {
  if (!(horizon >= 0.0)) throw NumericalError("negative fluid horizon");
  require_same_grid(rho0.grid, op.grid(), "fluid solve");
  FluidSolution sol;
  sol.integrated.grid = rho0.grid;
  sol.integrated.values.assign(rho0.grid.cells, 0.0);
  sol.integrated.horizon = horizon;
  sol.final_density = rho0;
  if (horizon == 0.0) return sol;

  const double dt_max = fluid_safety_factor * op.stability_bound();
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(horizon / dt_max)));
  const double dt = horizon / static_cast<double>(steps);
  DensityField& rho = sol.final_density;
  std::vector<double>& acc = sol.integrated.values;
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += 0.5 * dt * rho.values[j];
    op.step(rho, dt);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += 0.5 * dt * rho.values[j];
  }
  sol.steps = steps;
  return sol;
}

template <Background B>
FluidSolution fluid_solve(const DensityField& rho0, double horizon, const B& bg) {
  return fluid_solve(FluidOperator(rho0.grid, bg), rho0, horizon);
}

/// Moments of a fluid solution from its time-integrated density:
///   m0 = rho_bar
///   m1 = u rho_bar - (1/R) d_x(sigma^2 rho_bar)
///   m2 = (u^2 + sigma^2)/2 rho_bar - (1/R) d_x(u sigma^2 rho_bar)
/// The coefficients are static, so the time integral commutes with d_x.
template <Background B>
MomentField fluid_moments(const TimeIntegratedDensity& rho_bar, const B& bg,
                          const PeriodicGrid& target) {
  require_same_grid(rho_bar.grid, target, "fluid moments");
  if (rho_bar.values.size() != target.cells)
    throw DimensionError("fluid moments: density size does not match grid");
  const std::size_t n = target.cells;
  const double dx = target.dx();
  std::vector<double> u(n), s(n), inv_rate(n), g1(n), g2(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = target.center(j);
    u[j] = bg.mean_velocity(x);
    s[j] = bg.sigma_p2(x, true);
    inv_rate[j] = 1.0 / bg.collision_rate(x, true);
    g1[j] = s[j] * rho_bar.values[j];
    g2[j] = u[j] * g1[j];
  }
  MomentField m(target);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t left = j == 0 ? n - 1 : j - 1;
    const std::size_t right = j + 1 == n ? 0 : j + 1;
    const double rho = rho_bar.values[j];
    m.m0[j] = rho;
    m.m1[j] = u[j] * rho - inv_rate[j] * (g1[right] - g1[left]) / (2.0 * dx);
    m.m2[j] = 0.5 * (u[j] * u[j] + s[j]) * rho -
              inv_rate[j] * (g2[right] - g2[left]) / (2.0 * dx);
  }
  return m;
}

template <Background B>
MomentField fluid_moments(const TimeIntegratedDensity& rho_bar, const B& bg) {
  return fluid_moments(rho_bar, bg, rho_bar.grid);
}

struct FluidMethodOutput {
  MomentField moments;
  std::size_t steps = 0;
};

/// Pure fluid approximation: evolve the cell-averaged rho0 up to t_final and
/// take its moments.
template <Background B>
FluidMethodOutput run_fluid(const B& bg, const InitialDensity& rho0,
                            const PeriodicGrid& grid, double final_time) {
  if (!(final_time > 0.0)) throw ConfigError("final time must be positive");
  DensityField start(grid, rho0.cell_averages(grid));
  FluidSolution sol = fluid_solve(start, final_time, bg);
  return {fluid_moments(sol.integrated, bg), sol.steps};
}

}  // namespace kdmc
