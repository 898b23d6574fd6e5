// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "kdmc/errors.hpp"
#include "kdmc/grid.hpp"

namespace kdmc {

/// Initial particle density rho0 on [0, L), sampled by inverse CDF on a
/// tabulated cumulative integral (Simpson per table segment).
class InitialDensity {
 public:
  static constexpr std::size_t default_table_points = 10000;

  InitialDensity(std::function<double(double)> density, double length,
                 std::size_t table_points = default_table_points)
      : density_(std::move(density)), length_(length) {
    if (!(length > 0.0)) throw ConfigError("domain length must be positive");
    if (table_points < 2) throw ConfigError("density table needs >= 2 points");
    const double h = length / static_cast<double>(table_points);
    cumulative_.resize(table_points + 1, 0.0);
    double left = checked(0.0);
    for (std::size_t k = 0; k < table_points; ++k) {
      double a = static_cast<double>(k) * h;
      double mid = checked(a + 0.5 * h);
      double right = checked(a + h);
      cumulative_[k + 1] = cumulative_[k] + h * (left + 4.0 * mid + right) / 6.0;
      left = right;
    }
    if (!(total_mass() > 0.0))
      throw ConfigError("initial density has zero total mass");
  }

  /// rho0(x) = 1 + sin(2 pi x / L) / (2 pi)
  static InitialDensity canonical(double length = 1.0) {
    return InitialDensity(
        [length](double x) {
          return 1.0 + std::sin(2.0 * std::numbers::pi * x / length) /
                           (2.0 * std::numbers::pi);
        },
        length);
  }

  static InitialDensity uniform(double value, double length = 1.0) {
    return InitialDensity([value](double) { return value; }, length);
  }

  double length() const { return length_; }
  double total_mass() const { return cumulative_.back(); }
  double density(double x) const { return density_(x); }

  /// Normalized CDF on [0, L].
  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= length_) return 1.0;
    return mass_below(x) / total_mass();
  }

  /// Inverse CDF; u = 0 maps to 0 and u = 1 to L.
  double sample(double u) const {
    const double target = std::clamp(u, 0.0, 1.0) * total_mass();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) return length_;
    std::size_t k = static_cast<std::size_t>(it - cumulative_.begin());
    if (k == 0) return 0.0;
    --k;
    const double h = segment();
    const double width = cumulative_[k + 1] - cumulative_[k];
    const double frac = width > 0.0 ? (target - cumulative_[k]) / width : 0.0;
    return (static_cast<double>(k) + frac) * h;
  }

  /// Exact cell masses divided by dx, so sum(values) * dx == total_mass().
  std::vector<double> cell_averages(const PeriodicGrid& grid) const {
    if (std::abs(grid.length - length_) > 1e-12 * length_)
      throw DimensionError("initial density and grid have different lengths");
    std::vector<double> out(grid.cells);
    double below = 0.0;
    for (std::size_t j = 0; j < grid.cells; ++j) {
      double above = j + 1 == grid.cells ? total_mass()
                                          : mass_below(grid.lower_face(j + 1));
      out[j] = (above - below) / grid.dx();
      below = above;
    }
    return out;
  }

 private:
  double segment() const {
    return length_ / static_cast<double>(cumulative_.size() - 1);
  }

  double mass_below(double x) const {
    const double h = segment();
    double pos = x / h;
    auto k = static_cast<std::size_t>(pos);
    if (k >= cumulative_.size() - 1) return total_mass();
    double frac = pos - static_cast<double>(k);
    return cumulative_[k] + frac * (cumulative_[k + 1] - cumulative_[k]);
  }

  double checked(double x) const {
    double v = density_(x);
    if (!(v >= 0.0)) {
      throw ConfigError("initial density is negative at x = " +
                        std::to_string(x));
    }
    return v;
  }

  std::function<double(double)> density_;
  double length_;
  std::vector<double> cumulative_;
};

}  // namespace kdmc
