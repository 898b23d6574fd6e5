// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kdmc/errors.hpp"

namespace kdmc {

/// Map any real position onto [0, length).
inline double wrap_position(double x, double length) {
  if (x >= 0.0 && x < length) return x;
  double r = std::fmod(x, length);
  if (r < 0.0) r += length;
  // -tiny + length rounds up to length
  if (r >= length) r = 0.0;
  return r;
}

/// Uniform cell-centred grid on the periodic interval [0, length).
struct PeriodicGrid {
  std::size_t cells = 100;
  double length = 1.0;

  double dx() const { return length / static_cast<double>(cells); }
  double center(std::size_t j) const {
    return (static_cast<double>(j) + 0.5) * dx();
  }
  double lower_face(std::size_t j) const {
    return static_cast<double>(j) * dx();
  }

  /// Index of the cell containing x, where x is already inside [0, length).
  std::size_t cell_of(double x) const {
    auto j = static_cast<std::size_t>(x / dx());
    return j < cells ? j : cells - 1;
  }

  bool operator==(const PeriodicGrid&) const = default;
};

inline void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b,
                              const char* what) {
  if (!(a == b)) {
    throw DimensionError(std::string(what) + ": grid mismatch (" +
                         std::to_string(a.cells) + " vs " +
                         std::to_string(b.cells) + " cells)");
  }
}

/// Cell-averaged densities of the three time-integrated moments
/// m0 = int rho dt, m1 = int rho*v dt, m2 = int rho*v^2/2 dt.
struct MomentField {
  PeriodicGrid grid;
  std::vector<double> m0;
  std::vector<double> m1;
  std::vector<double> m2;

  MomentField() = default;
  explicit MomentField(const PeriodicGrid& g)
      : grid(g), m0(g.cells, 0.0), m1(g.cells, 0.0), m2(g.cells, 0.0) {}

  std::size_t cells() const { return grid.cells; }

  const std::vector<double>& moment(int q) const {
    return q == 0 ? m0 : (q == 1 ? m1 : m2);
  }
  std::vector<double>& moment(int q) {
    return q == 0 ? m0 : (q == 1 ? m1 : m2);
  }

  /// Integral of m0 over the domain.
  double integral_m0() const {
    double s = 0.0;
    for (double v : m0) s += v;
    return s * grid.dx();
  }

  MomentField& operator+=(const MomentField& other) {
    require_same_grid(grid, other.grid, "moment field merge");
    for (std::size_t j = 0; j < grid.cells; ++j) {
      m0[j] += other.m0[j];
      m1[j] += other.m1[j];
      m2[j] += other.m2[j];
    }
    return *this;
  }

  bool operator==(const MomentField&) const = default;
};

inline MomentField operator+(MomentField a, const MomentField& b) {
  a += b;
  return a;
}

}  // namespace kdmc
