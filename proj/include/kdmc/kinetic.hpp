// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "kdmc/background.hpp"
#include "kdmc/errors.hpp"
#include "kdmc/grid.hpp"
#include "kdmc/initial_density.hpp"
#include "kdmc/parallel.hpp"
#include "kdmc/sampling.hpp"
#include "kdmc/track_length.hpp"

namespace kdmc {

struct ParticleState {
  double x = 0.0;  // m, in [0, L)
  double v = 0.0;  // m/s
  double w = 1.0;  // represented mass
};

struct SimulationParameters {
  std::size_t particles = 10000;
  double final_time = 1e-3;
  PeriodicGrid grid{};
  std::uint64_t seed = 1;
  unsigned workers = 0;  // 0: hardware concurrency
};

template <Background B>
void validate(const SimulationParameters& p, const B& bg,
              const InitialDensity& rho0) {
  if (p.particles < 1) throw ConfigError("particle count must be >= 1");
  if (!(p.final_time > 0.0)) throw ConfigError("final time must be positive");
  if (p.grid.cells < 2) throw ConfigError("grid needs at least 2 cells");
  const double length = bg.domain_length();
  if (std::abs(p.grid.length - length) > 1e-12 * length ||
      std::abs(rho0.length() - length) > 1e-12 * length) {
    throw ConfigError("grid, background and initial density must share the "
                      "domain length");
  }
}

/// Initial position from rho0, initial velocity from the local Maxwellian.
template <Background B, Sampler S>
ParticleState initial_state(const B& bg, const InitialDensity& rho0, double w,
                            S& sampler) {
  ParticleState st;
  st.x = wrap_position(rho0.sample(sampler.uniform()), bg.domain_length());
  const LocalPlasma p = bg.local(st.x);
  st.v = maxwellian_velocity(p, sampler.standard_normal());
  st.w = w;
  return st;
}

/// Trajectory of one particle up to t_final for the BGK model with a
/// position-dependent rate R(x).
///
/// Flights are sampled by thinning against the majorant R_max: tentative
/// events arrive at rate R_max and are real collisions with probability
/// R(x)/R_max at the event position, which makes the flight-time law follow
/// the rate along the path. Real collisions redraw the velocity from the
/// local Maxwellian; the last flight is truncated at t_final. Returns the
/// number of real flights (collisions plus the final one). Rejected events
/// are not counted, so the count is that of an analog simulation.
template <Background B, Sampler S>
std::uint64_t simulate_kinetic_particle(const B& bg, ParticleState st,
                                        double t_final, S& sampler,
                                        MomentField& field) {
  const double length = bg.domain_length();
  const double majorant = bg.collision_rate_bound();
  std::uint64_t ops = 0;
  double t = 0.0;
  for (;;) {
    double tau = sampler.exponential(majorant);
    const double left = t_final - t;
    const bool last = tau >= left;
    if (last) tau = left;
    deposit_track(field, st.x, st.v, tau, st.w);
    st.x = wrap_position(st.x + st.v * tau, length);
    if (last) return ops + 1;
    t += tau;
    const LocalPlasma plasma = bg.local(st.x);
    if (sampler.uniform() * majorant <= plasma.collision_rate) {
      st.v = maxwellian_velocity(plasma, sampler.standard_normal());
      ++ops;
    }
  }
}

struct KineticOutput {
  MomentField moments;
  std::uint64_t operations = 0;
  double weight = 0.0;
  double total_mass = 0.0;
};

/// Reference kinetic Monte Carlo run with track-length estimation.
/// Particle i uses RngStream(seed, i); blocks of particles accumulate into
/// private fields which are summed in block order.
template <Background B>
KineticOutput run_kinetic(const B& bg, const InitialDensity& rho0,
                          const SimulationParameters& params) {
  validate(params, bg, rho0);
  KineticOutput out;
  out.total_mass = rho0.total_mass();
  out.weight = out.total_mass / static_cast<double>(params.particles);

  const std::size_t blocks = block_count(params.particles);
  std::vector<MomentField> partial(blocks, MomentField(params.grid));
  std::vector<std::uint64_t> ops(blocks, 0);
  for_each_block(blocks, params.workers, [&](std::size_t b) {
    const std::size_t begin = b * particle_block_size;
    const std::size_t end =
        std::min(params.particles, begin + particle_block_size);
    for (std::size_t i = begin; i < end; ++i) {
      StreamSampler sampler(params.seed, i);
      ParticleState st = initial_state(bg, rho0, out.weight, sampler);
      ops[b] += simulate_kinetic_particle(bg, st, params.final_time, sampler,
                                          partial[b]);
    }
  });

  out.moments = MomentField(params.grid);
  for (std::size_t b = 0; b < blocks; ++b) {
    out.moments += partial[b];
    out.operations += ops[b];
  }
  return out;
}

}  // namespace kdmc
