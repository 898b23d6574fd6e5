// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kdmc/background.hpp"
#include "kdmc/errors.hpp"
#include "kdmc/fluid.hpp"
#include "kdmc/grid.hpp"
#include "kdmc/initial_density.hpp"
#include "kdmc/kinetic.hpp"
#include "kdmc/parallel.hpp"
#include "kdmc/sampling.hpp"
#include "kdmc/track_length.hpp"

namespace kdmc {

/// Start position and duration of one diffusive step.
struct DiffusiveRecord {
  double x_start = 0.0;
  double duration = 0.0;
  double weight = 0.0;
};

enum class DepositScheme { nearest_cell, linear };

enum class EvolutionTimeMode {
  global_mean,        // sum of all durations / number of diffusive steps
  per_particle_mean,  // mean over particles of each particle's mean duration
};

/// Adds the point mass w at x to cell masses (not yet divided by dx).
inline void deposit_point_mass(std::vector<double>& mass, const PeriodicGrid& grid,
                               double x, double w, DepositScheme scheme) {
  if (scheme == DepositScheme::nearest_cell) {
    mass[grid.cell_of(x)] += w;
    return;
  }
  const double s = x / grid.dx() - 0.5;
  const double base = std::floor(s);
  const double frac = s - base;
  const auto n = static_cast<long long>(grid.cells);
  long long j = static_cast<long long>(base) % n;
  if (j < 0) j += n;
  const auto right = static_cast<std::size_t>((j + 1) % n);
  mass[static_cast<std::size_t>(j)] += w * (1.0 - frac);
  mass[right] += w * frac;
}

/// Streaming accumulator for diffusive records: the deposited initial
/// condition of the fluid estimation plus the duration statistics needed for
/// the evolution time. Raw records are kept only on request.
class DiffusiveTally {
 public:
  DiffusiveTally() = default;
  DiffusiveTally(const PeriodicGrid& grid, DepositScheme scheme,
                 bool keep_records = false)
      : grid_(grid), scheme_(scheme), keep_(keep_records), mass_(grid.cells, 0.0) {}

  void add(const DiffusiveRecord& r) {
    deposit_point_mass(mass_, grid_, r.x_start, r.weight, scheme_);
    ++count_;
    duration_sum_ += r.duration;
    weight_sum_ += r.weight;
    min_duration_ = count_ == 1 ? r.duration : std::min(min_duration_, r.duration);
    max_duration_ = std::max(max_duration_, r.duration);
    particle_sum_ += r.duration;
    ++particle_count_;
    if (keep_) records_.push_back(r);
  }

  /// Close the current particle; returns its number of diffusive steps.
  std::uint32_t finish_particle() {
    const std::uint32_t n = particle_count_;
    if (n > 0) {
      per_particle_mean_sum_ += particle_sum_ / n;
      ++particles_with_records_;
    }
    particle_sum_ = 0.0;
    particle_count_ = 0;
    return n;
  }

  void merge(const DiffusiveTally& other) {
    require_same_grid(grid_, other.grid_, "diffusive tally merge");
    for (std::size_t j = 0; j < mass_.size(); ++j) mass_[j] += other.mass_[j];
    if (other.count_ > 0) {
      min_duration_ = count_ == 0 ? other.min_duration_
                                  : std::min(min_duration_, other.min_duration_);
      max_duration_ = std::max(max_duration_, other.max_duration_);
    }
    count_ += other.count_;
    duration_sum_ += other.duration_sum_;
    weight_sum_ += other.weight_sum_;
    per_particle_mean_sum_ += other.per_particle_mean_sum_;
    particles_with_records_ += other.particles_with_records_;
    if (keep_)
      records_.insert(records_.end(), other.records_.begin(), other.records_.end());
  }

  const PeriodicGrid& grid() const { return grid_; }
  DepositScheme scheme() const { return scheme_; }
  std::uint64_t count() const { return count_; }
  double duration_sum() const { return duration_sum_; }
  double weight_sum() const { return weight_sum_; }
  double min_duration() const { return min_duration_; }
  double max_duration() const { return max_duration_; }
  std::uint64_t particles_with_records() const { return particles_with_records_; }
  const std::vector<double>& cell_mass() const { return mass_; }
  const std::vector<DiffusiveRecord>& records() const { return records_; }

  /// rho_f: deposited point masses as a cell-averaged density.
  DensityField density() const {
    DensityField rho(grid_);
    for (std::size_t j = 0; j < mass_.size(); ++j)
      rho.values[j] = mass_[j] / grid_.dx();
    return rho;
  }

  double evolution_time(EvolutionTimeMode mode) const {
    if (count_ == 0) return 0.0;
    if (mode == EvolutionTimeMode::global_mean)
      return duration_sum_ / static_cast<double>(count_);
    return per_particle_mean_sum_ / static_cast<double>(particles_with_records_);
  }

 private:
  PeriodicGrid grid_{};
  DepositScheme scheme_ = DepositScheme::nearest_cell;
  bool keep_ = false;
  std::vector<double> mass_;
  std::uint64_t count_ = 0;
  double duration_sum_ = 0.0;
  double weight_sum_ = 0.0;
  double min_duration_ = 0.0;
  double max_duration_ = 0.0;
  double per_particle_mean_sum_ = 0.0;
  std::uint64_t particles_with_records_ = 0;
  double particle_sum_ = 0.0;
  std::uint32_t particle_count_ = 0;
  std::vector<DiffusiveRecord> records_;
};

/// One KDMC time step of size dt.
///
/// Kinetic step: tau ~ Exp(R(x)), tau <- min(tau, dt), free flight x' = x +
/// tau v deposited with the track-length estimator. If tau < dt the particle
/// collided: a record (x', dt - tau, w) is emitted, the position takes the
/// diffusive step x'' = x' + A(x') theta + sqrt(2 D(x') theta) xi, and the
/// velocity is drawn from the Maxwellian at x''. Otherwise the velocity is
/// kept. `ops` grows by 1 or 2 positional updates.
///
/// Draw order: exponential, then (colliding branch only) xi, then velocity.
template <Background B, Sampler S, class Sink>
ParticleState kdmc_step(ParticleState st, double dt, const B& bg, S& sampler,
                        MomentField& field, Sink&& sink, std::uint64_t& ops) {
  const double length = bg.domain_length();
  const LocalPlasma here = bg.local(st.x);
  const double tau = sampler.exponential(here.collision_rate);
  ++ops;
  if (tau >= dt) {
    deposit_track(field, st.x, st.v, dt, st.w);
    st.x = wrap_position(st.x + st.v * dt, length);
    return st;
  }

  deposit_track(field, st.x, st.v, tau, st.w);
  const double x_kinetic = wrap_position(st.x + st.v * tau, length);
  const double theta = dt - tau;
  sink(DiffusiveRecord{x_kinetic, theta, st.w});

  const DiffusionCoefficients c = bg.diffusion_coefficients(x_kinetic);
  const double xi = sampler.standard_normal();
  st.x = wrap_position(
      x_kinetic + c.drift * theta + std::sqrt(2.0 * c.diffusion * theta) * xi,
      length);
  ++ops;
  const LocalPlasma there = bg.local(st.x);
  st.v = maxwellian_velocity(there, sampler.standard_normal());
  return st;
}

struct KdmcParameters {
  SimulationParameters simulation{};
  double time_step = 1e-3 / 85.0;
  DepositScheme deposit = DepositScheme::nearest_cell;
  bool keep_records = false;
};

/// Number of time steps K = t_final / dt; rejects a dt that does not divide
/// t_final.
inline std::size_t step_count(double final_time, double time_step) {
  if (!(time_step > 0.0)) throw ConfigError("time step must be positive");
  const double ratio = final_time / time_step;
  const double k = std::round(ratio);
  if (k < 1.0 || std::abs(ratio - k) > 1e-9 * std::max(1.0, k)) {
    throw ConfigError("time step must divide the final time (t/dt = " +
                      std::to_string(ratio) + ")");
  }
  return static_cast<std::size_t>(k);
}

struct KdmcOutput {
  MomentField kinetic;
  DiffusiveTally tally;
  std::uint64_t operations = 0;
  std::uint64_t kinetic_steps = 0;
  std::vector<std::uint32_t> diffusive_counts;  // K_i' per particle
  double weight = 0.0;
  double total_mass = 0.0;
  double kinetic_time = 0.0;  // sum of all kinetic flight durations
  std::size_t steps = 0;
  double time_step = 0.0;
};

/// KDMC simulation: K steps of kdmc_step for every particle, with the same
/// initialisation and per-particle streams as run_kinetic.
template <Background B>
KdmcOutput run_kdmc(const B& bg, const InitialDensity& rho0,
                    const KdmcParameters& params) {
  const SimulationParameters& sim = params.simulation;
  validate(sim, bg, rho0);
  KdmcOutput out;
  out.steps = step_count(sim.final_time, params.time_step);
  out.time_step = sim.final_time / static_cast<double>(out.steps);
  out.total_mass = rho0.total_mass();
  out.weight = out.total_mass / static_cast<double>(sim.particles);
  out.diffusive_counts.assign(sim.particles, 0);

  const std::size_t blocks = block_count(sim.particles);
  std::vector<MomentField> fields(blocks, MomentField(sim.grid));
  std::vector<DiffusiveTally> tallies(
      blocks, DiffusiveTally(sim.grid, params.deposit, params.keep_records));
  std::vector<std::uint64_t> ops(blocks, 0);
  std::vector<double> kinetic_time(blocks, 0.0);

  for_each_block(blocks, sim.workers, [&](std::size_t b) {
    const std::size_t begin = b * particle_block_size;
    const std::size_t end = std::min(sim.particles, begin + particle_block_size);
    DiffusiveTally& tally = tallies[b];
    double diffusive_time = 0.0;
    auto sink = [&](const DiffusiveRecord& r) {
      tally.add(r);
      diffusive_time += r.duration;
    };
    for (std::size_t i = begin; i < end; ++i) {
      StreamSampler sampler(sim.seed, i);
      ParticleState st = initial_state(bg, rho0, out.weight, sampler);
      for (std::size_t k = 0; k < out.steps; ++k)
        st = kdmc_step(st, out.time_step, bg, sampler, fields[b], sink, ops[b]);
      out.diffusive_counts[i] = tally.finish_particle();
    }
    kinetic_time[b] =
        static_cast<double>(end - begin) * sim.final_time - diffusive_time;
  });

  out.kinetic = MomentField(sim.grid);
  out.tally = DiffusiveTally(sim.grid, params.deposit, params.keep_records);
  for (std::size_t b = 0; b < blocks; ++b) {
    out.kinetic += fields[b];
    out.tally.merge(tallies[b]);
    out.operations += ops[b];
    out.kinetic_time += kinetic_time[b];
  }
  out.kinetic_steps = static_cast<std::uint64_t>(sim.particles) * out.steps;
  return out;
}

/// Evolution time of the fluid estimation from raw records. `counts` holds
/// K_i' per particle, in the order the records were produced; it is only
/// consulted for the per-particle mode.
inline double empirical_evolution_time(
    std::span<const DiffusiveRecord> records,
    std::span<const std::uint32_t> counts = {},
    EvolutionTimeMode mode = EvolutionTimeMode::global_mean) {
  if (records.empty()) return 0.0;
  if (mode == EvolutionTimeMode::global_mean) {
    double s = 0.0;
    for (const auto& r : records) s += r.duration;
    return s / static_cast<double>(records.size());
  }
  std::size_t pos = 0;
  double sum_of_means = 0.0;
  std::size_t particles = 0;
  for (std::uint32_t k : counts) {
    if (k == 0) continue;
    if (pos + k > records.size())
      throw DimensionError("diffusive counts exceed the number of records");
    double s = 0.0;
    for (std::uint32_t n = 0; n < k; ++n) s += records[pos + n].duration;
    pos += k;
    sum_of_means += s / k;
    ++particles;
  }
  if (pos != records.size())
    throw DimensionError("diffusive counts do not cover all records");
  return sum_of_means / static_cast<double>(particles);
}

/// Fluid part of the moments: the deposited rho_f evolves under the fluid
/// model for theta_hat and its time integral is turned into moments.
template <Background B>
MomentField fluid_estimation(const DensityField& rho_f, double theta_hat,
                             const B& bg) {
  if (theta_hat == 0.0) return MomentField(rho_f.grid);
  FluidSolution sol = fluid_solve(rho_f, theta_hat, bg);
  return fluid_moments(sol.integrated, bg);
}

template <Background B>
MomentField fluid_estimation(std::span<const DiffusiveRecord> records,
                             double theta_hat, const PeriodicGrid& grid,
                             const B& bg,
                             DepositScheme scheme = DepositScheme::nearest_cell) {
  if (std::abs(grid.length - bg.domain_length()) > 1e-12 * bg.domain_length())
    throw DimensionError("estimation grid does not match the background domain");
  std::vector<double> mass(grid.cells, 0.0);
  for (const auto& r : records) deposit_point_mass(mass, grid, r.x_start, r.weight, scheme);
  DensityField rho(grid);
  for (std::size_t j = 0; j < grid.cells; ++j) rho.values[j] = mass[j] / grid.dx();
  return fluid_estimation(rho, theta_hat, bg);
}

template <Background B>
MomentField fluid_estimation(const DiffusiveTally& tally, double theta_hat,
                             const B& bg) {
  return fluid_estimation(tally.density(), theta_hat, bg);
}

inline MomentField combine_moments(const MomentField& kinetic,
                                   const MomentField& fluid) {
  require_same_grid(kinetic.grid, fluid.grid, "combine moments");
  return kinetic + fluid;
}

struct KdmcEstimate {
  double evolution_time = 0.0;
  MomentField fluid;
  MomentField combined;
};

template <Background B>
KdmcEstimate estimate_moments(const KdmcOutput& out, const B& bg,
                              EvolutionTimeMode mode = EvolutionTimeMode::global_mean) {
  KdmcEstimate est;
  est.evolution_time = out.tally.evolution_time(mode);
  est.fluid = fluid_estimation(out.tally, est.evolution_time, bg);
  est.combined = combine_moments(out.kinetic, est.fluid);
  return est;
}

}  // namespace kdmc
