// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kdmc/background.hpp"
#include "kdmc/errors.hpp"
#include "kdmc/fluid.hpp"
#include "kdmc/grid.hpp"
#include "kdmc/initial_density.hpp"
#include "kdmc/kdmc.hpp"
#include "kdmc/kinetic.hpp"
#include "kdmc/metrics.hpp"
#include "kdmc/parallel.hpp"

namespace kdmc {

enum class Method { kinetic, kdmc, fluid };
enum class BackgroundKind { canonical, constant };
enum class DensityKind { canonical, uniform };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::kinetic: return "kinetic";
    case Method::kdmc: return "kdmc";
    case Method::fluid: return "fluid";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "kinetic") return Method::kinetic;
  if (s == "kdmc") return Method::kdmc;
  if (s == "fluid") return Method::fluid;
  throw ConfigError("unknown method '" + s + "' (kinetic | kdmc | fluid)");
}

inline BackgroundKind parse_background(const std::string& s) {
  if (s == "canonical") return BackgroundKind::canonical;
  if (s == "constant") return BackgroundKind::constant;
  throw ConfigError("unknown background '" + s + "' (canonical | constant)");
}

inline DensityKind parse_density(const std::string& s) {
  if (s == "canonical") return DensityKind::canonical;
  if (s == "uniform") return DensityKind::uniform;
  throw ConfigError("unknown initial density '" + s + "' (canonical | uniform)");
}

inline EvolutionTimeMode parse_evolution_time(const std::string& s) {
  if (s == "global") return EvolutionTimeMode::global_mean;
  if (s == "per-particle") return EvolutionTimeMode::per_particle_mean;
  throw ConfigError("unknown evolution time mode '" + s + "' (global | per-particle)");
}

inline DepositScheme parse_deposit(const std::string& s) {
  if (s == "nearest") return DepositScheme::nearest_cell;
  if (s == "linear") return DepositScheme::linear;
  throw ConfigError("unknown deposit scheme '" + s + "' (nearest | linear)");
}

/// One experiment. Defaults encode the canonical periodic test case.
struct SimConfig {
  Method method = Method::kdmc;
  double epsilon = 0.0027;
  std::size_t steps = 85;  // K, time step = final_time / K
  double final_time = 1e-3;
  std::size_t particles = 100000;
  std::size_t reference_particles = 1000000;
  std::size_t cells = 100;
  std::uint64_t seed = 1;
  BackgroundKind background = BackgroundKind::canonical;
  double ion_density = 1e21;
  double domain_length = 1.0;
  // constant background, unscaled values
  double constant_velocity = 0.0;
  double constant_sigma2 = 9.58e8;
  double constant_rate = 6.276e7;
  DensityKind density = DensityKind::canonical;
  EvolutionTimeMode evolution_time = EvolutionTimeMode::global_mean;
  DepositScheme deposit = DepositScheme::nearest_cell;
  unsigned workers = 0;

  double time_step() const { return final_time / static_cast<double>(steps); }
  PeriodicGrid grid() const { return {cells, domain_length}; }

  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (!(final_time > 0.0)) throw ConfigError("final time must be positive");
    if (particles < 1) throw ConfigError("particle count must be >= 1");
    if (reference_particles < 1)
      throw ConfigError("reference particle count must be >= 1");
    if (cells < 2) throw ConfigError("grid needs at least 2 cells");
    if (steps < 1) throw ConfigError("number of time steps must be >= 1");
    if (!(domain_length > 0.0)) throw ConfigError("domain length must be positive");
  }
};

/// Seed of the reference runs, disjoint from the run seed.
inline std::uint64_t reference_seed(std::uint64_t seed) {
  return seed ^ 0x5bd1e9955bd1e995ULL;
}

using AnyBackground = std::variant<CanonicalBackground, ConstantBackground>;

inline AnyBackground make_background(const SimConfig& cfg) {
  if (cfg.background == BackgroundKind::constant) {
    return ConstantBackground(cfg.constant_velocity, cfg.constant_sigma2,
                              cfg.constant_rate, cfg.epsilon, cfg.domain_length);
  }
  return CanonicalBackground(cfg.epsilon, cfg.ion_density, cfg.domain_length);
}

inline InitialDensity make_initial_density(const SimConfig& cfg) {
  if (cfg.density == DensityKind::uniform)
    return InitialDensity::uniform(1.0, cfg.domain_length);
  return InitialDensity::canonical(cfg.domain_length);
}

struct RunResult {
  Method method = Method::kdmc;
  MomentField moments;
  std::uint64_t operations = 0;
  double simulation_seconds = 0.0;
  double estimation_seconds = 0.0;
  std::size_t particles = 0;
  double total_mass = 0.0;
  // KDMC only
  double evolution_time = 0.0;
  std::uint64_t diffusive_steps = 0;
  double kinetic_part_mass = 0.0;

  double wall_seconds() const { return simulation_seconds + estimation_seconds; }
};

namespace detail {
inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
}  // namespace detail

/// Run one method on cfg's background with the given particle count and seed.
inline RunResult run_method(const SimConfig& cfg, Method method,
                            std::size_t particles, std::uint64_t seed) {
  cfg.validate();
  const AnyBackground any_bg = make_background(cfg);
  const InitialDensity rho0 = make_initial_density(cfg);
  return std::visit(
      [&](const auto& bg) {
        RunResult r;
        r.method = method;
        r.particles = particles;
        r.total_mass = rho0.total_mass();
        SimulationParameters sim{particles, cfg.final_time, cfg.grid(), seed,
                                 cfg.workers};
        auto t0 = std::chrono::steady_clock::now();
        switch (method) {
          case Method::kinetic: {
            KineticOutput out = run_kinetic(bg, rho0, sim);
            r.simulation_seconds = detail::seconds_since(t0);
            r.moments = std::move(out.moments);
            r.operations = out.operations;
            break;
          }
          case Method::kdmc: {
            KdmcParameters p{sim, cfg.time_step(), cfg.deposit, false};
            KdmcOutput out = run_kdmc(bg, rho0, p);
            r.simulation_seconds = detail::seconds_since(t0);
            auto t1 = std::chrono::steady_clock::now();
            KdmcEstimate est = estimate_moments(out, bg, cfg.evolution_time);
            r.estimation_seconds = detail::seconds_since(t1);
            r.moments = std::move(est.combined);
            r.operations = out.operations;
            r.evolution_time = est.evolution_time;
            r.diffusive_steps = out.tally.count();
            r.kinetic_part_mass = out.kinetic.integral_m0();
            break;
          }
          case Method::fluid: {
            FluidMethodOutput out = run_fluid(bg, rho0, cfg.grid(), cfg.final_time);
            r.simulation_seconds = detail::seconds_since(t0);
            r.moments = std::move(out.moments);
            break;
          }
        }
        return r;
      },
      any_bg);
}

inline RunResult run_method(const SimConfig& cfg) {
  return run_method(cfg, cfg.method, cfg.particles, cfg.seed);
}

inline double mean_inverse_rate(const SimConfig& cfg) {
  return std::visit([](const auto& bg) { return mean_inverse_rate(bg); },
                    make_background(cfg));
}

inline double mean_rate(const SimConfig& cfg) {
  return std::visit([](const auto& bg) { return mean_rate(bg); },
                    make_background(cfg));
}

struct SweepRow {
  std::string method;
  double swept_value = 0.0;
  MomentErrors errors;
  std::uint64_t operations = 0;
  double wall_seconds = 0.0;
  double speedup = 0.0;
};

struct SweepResult {
  std::string parameter;  // "epsilon" or "dt"
  double regime_boundary = 0.0;
  std::vector<SweepRow> rows;

  /// (swept value, error of moment q) for one method.
  std::vector<std::pair<double, double>> series(const std::string& method,
                                                int q) const {
    std::vector<std::pair<double, double>> out;
    for (const auto& r : rows)
      if (r.method == method) out.emplace_back(r.swept_value, r.errors[q]);
    return out;
  }
};

namespace detail {
/// Reference cost rescaled to `particles` particles.
inline double scaled_reference_time(const RunResult& ref, std::size_t particles) {
  return ref.wall_seconds() * static_cast<double>(particles) /
         static_cast<double>(ref.particles);
}

inline SweepRow make_row(const RunResult& run, const RunResult& ref, double value) {
  SweepRow row;
  row.method = to_string(run.method);
  row.swept_value = value;
  row.errors = relative_error(run.moments, ref.moments);
  row.operations = run.operations;
  row.wall_seconds = run.wall_seconds();
  row.speedup = row.wall_seconds > 0.0
                    ? scaled_reference_time(ref, run.particles) / row.wall_seconds
                    : 0.0;
  return row;
}

template <class Fn>
void for_each_point(std::size_t points, bool concurrent, Fn&& fn) {
  if (!concurrent) {
    for (std::size_t p = 0; p < points; ++p) fn(p);
    return;
  }
  for_each_block(points, 0, fn);
}
}  // namespace detail

/// Error of KDMC, the fluid method and a kinetic run at the same particle
/// count against a kinetic reference (reference_particles, disjoint seed),
/// for each epsilon at the fixed time step of `base`.
inline SweepResult sweep_epsilon(const SimConfig& base, std::span<const double> eps,
                                 bool concurrent = false) {
  base.validate();
  SweepResult out;
  out.parameter = "epsilon";
  {
    SimConfig unit = base;
    unit.epsilon = 1.0;
    out.regime_boundary = std::sqrt(base.time_step() / mean_inverse_rate(unit));
  }
  std::vector<std::vector<SweepRow>> rows(eps.size());
  detail::for_each_point(eps.size(), concurrent, [&](std::size_t p) {
    SimConfig cfg = base;
    cfg.epsilon = eps[p];
    if (concurrent) cfg.workers = 1;
    RunResult ref = run_method(cfg, Method::kinetic, cfg.reference_particles,
                               reference_seed(cfg.seed));
    for (Method m : {Method::kdmc, Method::fluid, Method::kinetic}) {
      RunResult run = run_method(cfg, m, cfg.particles, cfg.seed);
      rows[p].push_back(detail::make_row(run, ref, eps[p]));
    }
  });
  for (auto& r : rows) out.rows.insert(out.rows.end(), r.begin(), r.end());
  return out;
}

/// Same as sweep_epsilon, sweeping the number of time steps K at fixed
/// epsilon. The swept value is dt = final_time / K.
inline SweepResult sweep_dt(const SimConfig& base, std::span<const std::size_t> steps,
                            bool concurrent = false) {
  base.validate();
  SweepResult out;
  out.parameter = "dt";
  out.regime_boundary = mean_inverse_rate(base);
  RunResult ref = run_method(base, Method::kinetic, base.reference_particles,
                             reference_seed(base.seed));
  RunResult fluid = run_method(base, Method::fluid, base.particles, base.seed);
  RunResult kinetic = run_method(base, Method::kinetic, base.particles, base.seed);
  std::vector<SweepRow> kdmc_rows(steps.size());
  detail::for_each_point(steps.size(), concurrent, [&](std::size_t p) {
    SimConfig cfg = base;
    cfg.steps = steps[p];
    if (concurrent) cfg.workers = 1;
    RunResult run = run_method(cfg, Method::kdmc, cfg.particles, cfg.seed);
    kdmc_rows[p] = detail::make_row(run, ref, cfg.time_step());
  });
  for (std::size_t p = 0; p < steps.size(); ++p) {
    const double dt = base.final_time / static_cast<double>(steps[p]);
    out.rows.push_back(kdmc_rows[p]);
    out.rows.push_back(detail::make_row(fluid, ref, dt));
    out.rows.push_back(detail::make_row(kinetic, ref, dt));
  }
  return out;
}

struct CostRow {
  std::size_t steps = 0;
  double time_step = 0.0;
  std::uint64_t kdmc_operations = 0;
  std::uint64_t kinetic_operations = 0;
  double simulation_seconds = 0.0;
  double estimation_seconds = 0.0;
  double speedup = 0.0;
  double predicted_speedup = 0.0;  // dt * mean(R) / 2

  double op_ratio() const {
    return static_cast<double>(kinetic_operations) /
           static_cast<double>(kdmc_operations);
  }
  double estimation_share() const {
    return estimation_seconds / (simulation_seconds + estimation_seconds);
  }
};

struct CostReport {
  double kinetic_seconds = 0.0;
  std::uint64_t kinetic_operations = 0;
  double mean_inverse_rate = 0.0;
  std::vector<CostRow> rows;
};

/// KDMC cost against a kinetic run with the same particles and seed. Wall
/// times are the minimum over `repeats` runs.
inline CostReport cost_report(const SimConfig& base, std::span<const std::size_t> steps,
                              int repeats = 1) {
  base.validate();
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  CostReport rep;
  rep.mean_inverse_rate = mean_inverse_rate(base);
  const double rate = mean_rate(base);
  for (int k = 0; k < repeats; ++k) {
    RunResult kin = run_method(base, Method::kinetic, base.particles, base.seed);
    rep.kinetic_operations = kin.operations;
    rep.kinetic_seconds = k == 0 ? kin.wall_seconds()
                                 : std::min(rep.kinetic_seconds, kin.wall_seconds());
  }
  for (std::size_t K : steps) {
    SimConfig cfg = base;
    cfg.steps = K;
    CostRow row;
    row.steps = K;
    row.time_step = cfg.time_step();
    row.kinetic_operations = rep.kinetic_operations;
    double best = 0.0;
    for (int k = 0; k < repeats; ++k) {
      RunResult run = run_method(cfg, Method::kdmc, cfg.particles, cfg.seed);
      row.kdmc_operations = run.operations;
      if (k == 0 || run.wall_seconds() < best) {
        best = run.wall_seconds();
        row.simulation_seconds = run.simulation_seconds;
        row.estimation_seconds = run.estimation_seconds;
      }
    }
    row.speedup = rep.kinetic_seconds / best;
    row.predicted_speedup = row.time_step * rate / 2.0;
    rep.rows.push_back(row);
  }
  return rep;
}

/// Time step at which the kinetic/KDMC operation ratio crosses 1,
/// interpolated linearly in log-log between the bracketing rows; NaN when the
/// rows do not bracket the crossing.
inline double op_ratio_crossover(std::span<const CostRow> rows) {
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double r0 = std::log(rows[i].op_ratio());
    const double r1 = std::log(rows[i + 1].op_ratio());
    if ((r0 >= 0.0) != (r1 >= 0.0)) {
      const double x0 = std::log(rows[i].time_step);
      const double x1 = std::log(rows[i + 1].time_step);
      return std::exp(x0 + (0.0 - r0) * (x1 - x0) / (r1 - r0));
    }
  }
  return std::nan("");
}

// CSV output. Every file starts with a versioned schema comment.

namespace detail {
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline constexpr const char* moments_schema = "# kdmc-moments v1";
inline constexpr const char* sweep_schema = "# kdmc-sweep v1";
inline constexpr const char* cost_schema = "# kdmc-cost v1";

inline void write_moments_csv(std::ostream& os, const MomentField& m) {
  os << moments_schema << '\n' << "x,m0,m1,m2\n";
  for (std::size_t j = 0; j < m.cells(); ++j) {
    os << detail::num(m.grid.center(j)) << ',' << detail::num(m.m0[j]) << ','
       << detail::num(m.m1[j]) << ',' << detail::num(m.m2[j]) << '\n';
  }
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& s) {
  os << sweep_schema << '\n'
     << "# parameter=" << s.parameter << '\n'
     << "# regime_boundary=" << detail::num(s.regime_boundary) << '\n'
     << "method,swept_value,e0,e1,e2,ops,wall_s,speedup\n";
  for (const auto& r : s.rows) {
    os << r.method << ',' << detail::num(r.swept_value) << ','
       << detail::num(r.errors.e0) << ',' << detail::num(r.errors.e1) << ','
       << detail::num(r.errors.e2) << ',' << r.operations << ','
       << detail::num(r.wall_seconds) << ',' << detail::num(r.speedup) << '\n';
  }
}

inline void write_cost_csv(std::ostream& os, const CostReport& c) {
  os << cost_schema << '\n'
     << "# kinetic_s=" << detail::num(c.kinetic_seconds) << '\n'
     << "# mean_inverse_rate=" << detail::num(c.mean_inverse_rate) << '\n'
     << "K,dt,ops_kdmc,ops_kinetic,op_ratio,sim_s,est_s,speedup,"
        "predicted_speedup,est_share\n";
  for (const auto& r : c.rows) {
    os << r.steps << ',' << detail::num(r.time_step) << ',' << r.kdmc_operations
       << ',' << r.kinetic_operations << ',' << detail::num(r.op_ratio()) << ','
       << detail::num(r.simulation_seconds) << ','
       << detail::num(r.estimation_seconds) << ',' << detail::num(r.speedup)
       << ',' << detail::num(r.predicted_speedup) << ','
       << detail::num(r.estimation_share()) << '\n';
  }
}

}  // namespace kdmc
