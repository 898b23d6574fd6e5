// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kdmc/errors.hpp"
#include "kdmc/grid.hpp"

namespace kdmc {

struct MomentErrors {
  double e0 = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;

  double operator[](int q) const { return q == 0 ? e0 : (q == 1 ? e1 : e2); }
};

/// Relative L2 error per moment, ||est_q - ref_q|| / ||ref_q||.
inline MomentErrors relative_error(const MomentField& est, const MomentField& ref) {
  require_same_grid(est.grid, ref.grid, "relative error");
  double e[3];
  for (int q = 0; q < 3; ++q) {
    const auto& a = est.moment(q);
    const auto& b = ref.moment(q);
    double diff = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      diff += (a[j] - b[j]) * (a[j] - b[j]);
      norm += b[j] * b[j];
    }
    if (norm == 0.0)
      throw UndefinedNormError("reference moment m" + std::to_string(q) +
                               " has zero norm");
    e[q] = std::sqrt(diff) / std::sqrt(norm);
  }
  return {e[0], e[1], e[2]};
}

/// Least-squares slope of log(err) against log(x).
inline double fit_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3)
    throw InsufficientDataError("slope fit needs at least 3 points, got " +
                                std::to_string(points.size()));
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0))
      throw NumericalError("slope fit needs positive coordinates");
    sx += std::log(x);
    sy += std::log(y);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - my);
  }
  if (sxx == 0.0) throw InsufficientDataError("slope fit needs distinct x values");
  return sxy / sxx;
}

/// Slope over the points accepted by `in_regime(x)`.
template <class Filter>
double fit_slope(std::span<const std::pair<double, double>> points,
                 Filter&& in_regime) {
  std::vector<std::pair<double, double>> kept;
  for (const auto& p : points)
    if (in_regime(p.first)) kept.push_back(p);
  return fit_slope(std::span<const std::pair<double, double>>(kept));
}

}  // namespace kdmc
