// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <numbers>
#include <string>
#include <utility>

#include "kdmc/errors.hpp"
#include "kdmc/grid.hpp"

namespace kdmc {

namespace constants {
inline constexpr double elementary_charge = 1.60e-19;  // J/eV
inline constexpr double proton_mass = 1.67e-27;        // kg
inline constexpr double rate_coefficient = 3.2e-15;    // m^3/s
inline constexpr double reference_temperature = 0.026; // eV
/// Order of magnitude of sigma_p^2 and R in the unscaled test case.
inline constexpr double reference_scale = 1e-7;
}  // namespace constants

/// Drift and diffusion of the positional update x' = x + A*t + sqrt(2*D*t)*xi.
///
/// The pair is chosen so that the Fokker-Planck equation of the update is the
/// fluid model  d_t rho + d_x(u rho) - d_x( (1/R) d_x(sigma^2 rho) ) = 0:
/// expanding the flux gives D = sigma^2/R and A = u + sigma^2 * d_x(1/R).
struct DiffusionCoefficients {
  double drift = 0.0;      // m/s
  double diffusion = 0.0;  // m^2/s
};

/// Scaled plasma quantities at one point, evaluated together in hot loops.
struct LocalPlasma {
  double mean_velocity = 0.0;   // u_p
  double thermal_speed = 0.0;   // sqrt(scaled sigma_p^2)
  double collision_rate = 0.0;  // scaled R
};

// clang-format off
template <class B>
concept Background = requires(const B& b, double x) {
  { b.domain_length() } -> std::convertible_to<double>;
  { b.mean_velocity(x) } -> std::convertible_to<double>;
  { b.sigma_p2(x, true) } -> std::convertible_to<double>;
  { b.collision_rate(x, true) } -> std::convertible_to<double>;
  { b.diffusion_coefficients(x) } -> std::same_as<DiffusionCoefficients>;
  { b.local(x) } -> std::same_as<LocalPlasma>;
  { b.collision_rate_bound() } -> std::convertible_to<double>;
};
// clang-format on

inline double diffusive_scaling(double epsilon) {
  return constants::reference_scale / (epsilon * epsilon);
}

/// Heterogeneous background of the one-dimensional fusion-like test case:
///   T_i(x) = 5.5 + 4.5 cos(2 pi x / L)            [eV]
///   u_p(x) = 100 + sin(6 pi x / L) / (6 pi)       [m/s]
///   sigma_p^2 = e T_i / m_p,  R = rho_i 3.2e-15 sqrt(T_i / 0.026)
/// with sigma_p^2 and R multiplied by 1e-7/eps^2 in their scaled form.
class CanonicalBackground {
 public:
  struct Profile {
    double temperature_offset = 5.5;
    double temperature_amplitude = 4.5;
    double temperature_wavenumber = 1.0;  // periods per domain length
    double velocity_offset = 100.0;
    double velocity_amplitude = 1.0 / (6.0 * std::numbers::pi);
    double velocity_wavenumber = 3.0;
  };

  explicit CanonicalBackground(double epsilon, double ion_density = 1e21,
                               double domain_length = 1.0)
      : CanonicalBackground(epsilon, ion_density, domain_length, Profile{}) {}

  CanonicalBackground(double epsilon, double ion_density,
                      double domain_length, const Profile& profile)
      : epsilon_(epsilon),
        ion_density_(ion_density),
        length_(domain_length),
        profile_(profile) {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (!(ion_density > 0.0)) throw ConfigError("ion density must be positive");
    if (!(domain_length > 0.0))
      throw ConfigError("domain length must be positive");
    if (!(profile.temperature_offset - std::abs(profile.temperature_amplitude) >
          0.0))
      throw ConfigError("ion temperature profile must stay positive");
    scale_ = diffusive_scaling(epsilon);
    sigma2_per_ev_ = constants::elementary_charge / constants::proton_mass;
    rate_per_sqrt_ev_ = ion_density * constants::rate_coefficient /
                        std::sqrt(constants::reference_temperature);
    thermal_speed_per_sqrt_ev_ = std::sqrt(sigma2_per_ev_ * scale_);
  }

  double epsilon() const { return epsilon_; }
  double ion_density() const { return ion_density_; }
  double domain_length() const { return length_; }
  double scaling() const { return scale_; }
  const Profile& profile() const { return profile_; }

  double temperature(double x) const {
    return profile_.temperature_offset +
           profile_.temperature_amplitude * std::cos(temperature_phase(x));
  }

  double mean_velocity(double x) const {
    return profile_.velocity_offset +
           profile_.velocity_amplitude *
               std::sin(2.0 * std::numbers::pi * profile_.velocity_wavenumber *
                        reduced(x));
  }

  double sigma_p2(double x, bool scaled) const {
    double s = sigma2_per_ev_ * temperature(x);
    return scaled ? s * scale_ : s;
  }

  double collision_rate(double x, bool scaled) const {
    double r = rate_per_sqrt_ev_ * std::sqrt(temperature(x));
    return scaled ? r * scale_ : r;
  }

  /// Analytic coefficients. With T' = -a k sin(k x), (1/R)' = -(1/R) T'/(2T),
  /// so A = u + D * (-T'/(2T)) and the 1e-7/eps^2 factors cancel in both.
  DiffusionCoefficients diffusion_coefficients(double x) const {
    double phase = temperature_phase(x);
    double k = 2.0 * std::numbers::pi * profile_.temperature_wavenumber / length_;
    double t = profile_.temperature_offset +
               profile_.temperature_amplitude * std::cos(phase);
    double dt = -profile_.temperature_amplitude * k * std::sin(phase);
    double sigma2 = sigma2_per_ev_ * t * scale_;
    double rate = rate_per_sqrt_ev_ * std::sqrt(t) * scale_;
    double diffusion = sigma2 / rate;
    return {mean_velocity(x) - diffusion * dt / (2.0 * t), diffusion};
  }

  /// Upper bound of the scaled collision rate (majorant for thinning).
  double collision_rate_bound() const {
    return rate_per_sqrt_ev_ *
           std::sqrt(profile_.temperature_offset +
                     std::abs(profile_.temperature_amplitude)) *
           scale_;
  }

  LocalPlasma local(double x) const {
    double sqrt_t = std::sqrt(temperature(x));
    return {mean_velocity(x), thermal_speed_per_sqrt_ev_ * sqrt_t,
            rate_per_sqrt_ev_ * sqrt_t * scale_};
  }

 private:
  double reduced(double x) const { return wrap_position(x, length_) / length_; }
  double temperature_phase(double x) const {
    return 2.0 * std::numbers::pi * profile_.temperature_wavenumber * reduced(x);
  }

  double epsilon_;
  double ion_density_;
  double length_;
  Profile profile_;
  double scale_ = 1.0;
  double sigma2_per_ev_ = 0.0;
  double rate_per_sqrt_ev_ = 0.0;
  double thermal_speed_per_sqrt_ev_ = 0.0;
};

/// Spatially constant background. Values are unscaled unless built through
/// ConstantBackground::scaled, which installs them as-is.
class ConstantBackground {
 public:
  ConstantBackground(double mean_velocity, double sigma2, double rate,
                     double epsilon, double domain_length = 1.0)
      : ConstantBackground(mean_velocity, sigma2, rate,
                           epsilon > 0.0 ? diffusive_scaling(epsilon) : -1.0,
                           domain_length, epsilon) {}

  static ConstantBackground scaled(double mean_velocity, double sigma2,
                                   double rate, double domain_length = 1.0) {
    return ConstantBackground(mean_velocity, sigma2, rate, 1.0, domain_length,
                              std::sqrt(constants::reference_scale));
  }

  double epsilon() const { return epsilon_; }
  double domain_length() const { return length_; }
  double scaling() const { return scale_; }
  double mean_velocity(double) const { return u_; }
  double sigma_p2(double, bool scaled) const {
    return scaled ? sigma2_ * scale_ : sigma2_;
  }
  double collision_rate(double, bool scaled) const {
    return scaled ? rate_ * scale_ : rate_;
  }
  DiffusionCoefficients diffusion_coefficients(double) const {
    return {u_, sigma2_ / rate_};
  }
  LocalPlasma local(double) const {
    return {u_, std::sqrt(sigma2_ * scale_), rate_ * scale_};
  }
  double collision_rate_bound() const { return rate_ * scale_; }

 private:
  ConstantBackground(double u, double sigma2, double rate, double scale,
                     double length, double epsilon)
      : u_(u), sigma2_(sigma2), rate_(rate), scale_(scale), length_(length),
        epsilon_(epsilon) {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (!(length > 0.0)) throw ConfigError("domain length must be positive");
    if (!(sigma2 > 0.0)) throw ConfigError("sigma_p^2 must be positive");
    if (!(rate > 0.0)) throw ConfigError("collision rate must be positive");
  }

  double u_;
  double sigma2_;
  double rate_;
  double scale_;
  double length_;
  double epsilon_;
};

/// Background assembled from user callables for the unscaled u_p, sigma_p^2
/// and R. The drift uses a central difference of 1/R with h = 1e-6 L.
template <class VelocityFn, class Sigma2Fn, class RateFn>
class ProfileBackground {
 public:
  ProfileBackground(VelocityFn u, Sigma2Fn sigma2, RateFn rate, double epsilon,
                    double domain_length = 1.0)
      : u_(std::move(u)),
        sigma2_(std::move(sigma2)),
        rate_(std::move(rate)),
        epsilon_(epsilon),
        length_(domain_length) {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (!(domain_length > 0.0))
      throw ConfigError("domain length must be positive");
    scale_ = diffusive_scaling(epsilon);
    for (std::size_t k = 0; k <= 10000; ++k) {
      bound_ = std::max(
          bound_, collision_rate(static_cast<double>(k) * 1e-4 * length_, true));
    }
    bound_ *= 1.01;
  }

  double epsilon() const { return epsilon_; }
  double domain_length() const { return length_; }
  double scaling() const { return scale_; }
  double mean_velocity(double x) const { return u_(wrap_position(x, length_)); }
  double sigma_p2(double x, bool scaled) const {
    double s = sigma2_(wrap_position(x, length_));
    return scaled ? s * scale_ : s;
  }
  double collision_rate(double x, bool scaled) const {
    double r = rate_(wrap_position(x, length_));
    return scaled ? r * scale_ : r;
  }

  DiffusionCoefficients diffusion_coefficients(double x) const {
    const double h = 1e-6 * length_;
    double sigma2 = sigma_p2(x, true);
    double d_inv_rate =
        (inverse_rate(x + h) - inverse_rate(x - h)) / (2.0 * h);
    return {mean_velocity(x) + sigma2 * d_inv_rate,
            sigma2 * inverse_rate(x)};
  }

  LocalPlasma local(double x) const {
    return {mean_velocity(x), std::sqrt(sigma_p2(x, true)),
            collision_rate(x, true)};
  }

  /// Probed maximum of the scaled rate with a 1% margin. Only as reliable as
  /// the probe density for rough user profiles.
  double collision_rate_bound() const { return bound_; }

 private:
  double inverse_rate(double x) const {
    double r = collision_rate(x, true);
    if (r == 0.0) {
      throw NumericalError("collision rate vanishes at x = " +
                           std::to_string(x));
    }
    return 1.0 / r;
  }

  VelocityFn u_;
  Sigma2Fn sigma2_;
  RateFn rate_;
  double epsilon_;
  double length_;
  double scale_ = 1.0;
  double bound_ = 0.0;
};

template <Background B>
double mean_inverse_rate(const B& bg, std::size_t probes = 10000) {
  double s = 0.0;
  double h = bg.domain_length() / static_cast<double>(probes);
  for (std::size_t k = 0; k < probes; ++k)
    s += 1.0 / bg.collision_rate((static_cast<double>(k) + 0.5) * h, true);
  return s / static_cast<double>(probes);
}

template <Background B>
double mean_rate(const B& bg, std::size_t probes = 10000) {
  double s = 0.0;
  double h = bg.domain_length() / static_cast<double>(probes);
  for (std::size_t k = 0; k < probes; ++k)
    s += bg.collision_rate((static_cast<double>(k) + 0.5) * h, true);
  return s / static_cast<double>(probes);
}

template <Background B>
double max_rate(const B& bg, std::size_t probes = 10000) {
  double m = 0.0;
  double h = bg.domain_length() / static_cast<double>(probes);
  for (std::size_t k = 0; k <= probes; ++k)
    m = std::max(m, bg.collision_rate(static_cast<double>(k) * h, true));
  return m;
}

}  // namespace kdmc
