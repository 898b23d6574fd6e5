// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>

#include "kdmc/grid.hpp"

namespace kdmc {

/// Track-length estimator for one free flight of duration tau starting at x0
/// (inside [0, L)) with velocity v. Every traversed cell j receives
/// w*t_j/dx in m0, w*v*t_j/dx in m1 and w*(v^2/2)*t_j/dx in m2, where t_j is
/// the time spent in the cell; the t_j sum to tau.
inline void deposit_track(MomentField& field, double x0, double v, double tau,
                          double w) {
  const PeriodicGrid& grid = field.grid;
  const std::size_t cells = grid.cells;
  const double dx = grid.dx();
  const double scale = w / dx;
  const double energy = 0.5 * v * v;
  double* m0 = field.m0.data();
  double* m1 = field.m1.data();
  double* m2 = field.m2.data();
  auto add = [&](std::size_t j, double t) {
    const double a = scale * t;
    m0[j] += a;
    m1[j] += a * v;
    m2[j] += a * energy;
  };

  std::size_t j = grid.cell_of(x0);
  if (v == 0.0 || tau == 0.0) {
    add(j, tau);
    return;
  }

  double offset = std::clamp(x0 - grid.lower_face(j), 0.0, dx);
  double remaining = tau;
  if (v > 0.0) {
    for (;;) {
      const double t_cell = (dx - offset) / v;
      if (t_cell >= remaining) {
        add(j, remaining);
        return;
      }
      add(j, t_cell);
      remaining -= t_cell;
      j = j + 1 == cells ? 0 : j + 1;
      offset = 0.0;
    }
  } else {
    for (;;) {
      const double t_cell = offset / -v;
      if (t_cell >= remaining) {
        add(j, remaining);
        return;
      }
      add(j, t_cell);
      remaining -= t_cell;
      j = j == 0 ? cells - 1 : j - 1;
      offset = dx;
    }
  }
}

}  // namespace kdmc
