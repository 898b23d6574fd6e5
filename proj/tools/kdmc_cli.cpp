// SPDX-License-Identifier: Apache-2.0
//
// Experiment driver: single runs, epsilon / time-step sweeps and cost reports.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kdmc/harness.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

struct Options {
  std::string method = "kdmc";
  std::string background = "canonical";
  std::string density = "canonical";
  std::string theta_mode = "global";
  std::string deposit = "nearest";
  std::optional<double> dt;
  std::string output;
  std::vector<double> eps_list;
  std::vector<std::size_t> k_list;
  bool concurrent = false;
  int repeats = 1;
};

std::vector<double> default_eps_list() {
  std::vector<double> eps;
  for (int k = 0; k <= 7; ++k) eps.push_back(std::pow(10.0, -0.5 * k));
  return eps;
}

const std::vector<std::size_t> table_k_list{1, 2, 5, 10, 15, 25, 50, 85, 100};

kdmc::SimConfig resolve(kdmc::SimConfig cfg, const Options& opt) {
  cfg.method = kdmc::parse_method(opt.method);
  cfg.background = kdmc::parse_background(opt.background);
  cfg.density = kdmc::parse_density(opt.density);
  cfg.evolution_time = kdmc::parse_evolution_time(opt.theta_mode);
  cfg.deposit = kdmc::parse_deposit(opt.deposit);
  if (opt.dt) cfg.steps = kdmc::step_count(cfg.final_time, *opt.dt);
  cfg.validate();
  return cfg;
}

template <class Writer>
void emit(const std::string& path, Writer&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream file(path);
  if (!file) throw kdmc::ConfigError("cannot open output file " + path);
  write(file);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinetic-diffusion Monte Carlo experiments"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value configuration file");

  kdmc::SimConfig cfg;
  Options opt;
  app.add_option("--method", opt.method, "kinetic | kdmc | fluid")
      ->capture_default_str();
  app.add_option("--epsilon", cfg.epsilon, "Diffusive scaling parameter")
      ->capture_default_str();
  app.add_option("--steps,-K", cfg.steps, "Number of time steps K")
      ->capture_default_str();
  app.add_option("--dt", opt.dt, "Time step; must divide the final time");
  app.add_option("--t-final", cfg.final_time, "Final time [s]")
      ->capture_default_str();
  app.add_option("--particles,-I", cfg.particles, "Number of particles")
      ->capture_default_str();
  app.add_option("--ref-particles", cfg.reference_particles,
                 "Particles of the kinetic reference in sweeps")
      ->capture_default_str();
  app.add_option("--cells,-J", cfg.cells, "Estimator grid cells")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  app.add_option("--background", opt.background, "canonical | constant")
      ->capture_default_str();
  app.add_option("--ion-density", cfg.ion_density)->capture_default_str();
  app.add_option("--length", cfg.domain_length, "Domain length [m]")
      ->capture_default_str();
  app.add_option("--const-u", cfg.constant_velocity)->capture_default_str();
  app.add_option("--const-sigma2", cfg.constant_sigma2)->capture_default_str();
  app.add_option("--const-rate", cfg.constant_rate)->capture_default_str();
  app.add_option("--density", opt.density, "canonical | uniform")
      ->capture_default_str();
  app.add_option("--theta-mode", opt.theta_mode,
                 "Evolution time: global | per-particle")
      ->capture_default_str();
  app.add_option("--deposit", opt.deposit, "Record deposit: nearest | linear")
      ->capture_default_str();
  app.add_option("--workers", cfg.workers, "Worker threads (0 = all cores)")
      ->capture_default_str();
  app.add_option("--output,-o", opt.output, "Output CSV path (default stdout)");

  auto* run = app.add_subcommand("run", "One simulation; writes x,m0,m1,m2");

  auto* sweep_eps = app.add_subcommand("sweep-eps", "Error against epsilon");
  opt.eps_list = default_eps_list();
  sweep_eps->add_option("--eps-list", opt.eps_list)->delimiter(',');
  sweep_eps->add_flag("--concurrent", opt.concurrent,
                      "Run sweep points concurrently (timings not meaningful)");

  auto* sweep_dt = app.add_subcommand("sweep-dt", "Error against the time step");
  opt.k_list = table_k_list;
  sweep_dt->add_option("--k-list", opt.k_list)->delimiter(',');
  sweep_dt->add_flag("--concurrent", opt.concurrent);

  auto* cost = app.add_subcommand("cost-report", "Operation counts and timings");
  cost->add_option("--k-list", opt.k_list)->delimiter(',');
  cost->add_option("--repeats", opt.repeats, "Timing repetitions (minimum kept)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    const kdmc::SimConfig resolved = resolve(cfg, opt);
    if (*run) {
      kdmc::RunResult r = kdmc::run_method(resolved);
      emit(opt.output, [&](std::ostream& os) { kdmc::write_moments_csv(os, r.moments); });
      std::cerr << "method=" << kdmc::to_string(r.method)
                << " ops=" << r.operations << " sim_s=" << r.simulation_seconds
                << " est_s=" << r.estimation_seconds
                << " mass=" << r.moments.integral_m0() << '\n';
    } else if (*sweep_eps) {
      auto s = kdmc::sweep_epsilon(resolved, opt.eps_list, opt.concurrent);
      emit(opt.output, [&](std::ostream& os) { kdmc::write_sweep_csv(os, s); });
    } else if (*sweep_dt) {
      auto s = kdmc::sweep_dt(resolved, opt.k_list, opt.concurrent);
      emit(opt.output, [&](std::ostream& os) { kdmc::write_sweep_csv(os, s); });
    } else if (*cost) {
      auto c = kdmc::cost_report(resolved, opt.k_list, opt.repeats);
      emit(opt.output, [&](std::ostream& os) { kdmc::write_cost_csv(os, c); });
    }
  } catch (const kdmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  }
  return 0;
}
