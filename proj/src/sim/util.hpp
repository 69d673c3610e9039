// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "wsloc/geometry.hpp"
#include "wsloc/random.hpp"

namespace wsloc::sim_internal {

inline constexpr double kJitterLimit = 2.5;

inline double jitter_confidence(double magnitude, double sigma) {
  if (sigma <= 0.0) return 1.0;
  const double r = magnitude / (4.0 * sigma);
  return 1.0 / (1.0 + r * r);
}

// Perturbs each coordinate by sigma * truncated normal and clamps to the
// image. Returns nullopt when the clamped box is degenerate.
inline std::optional<Box2D> jitter_box(double x0, double y0, double x1,
                                       double y1, double sigma, int label,
                                       ImageSize image, std::mt19937_64& rng) {
  double d[4] = {0.0, 0.0, 0.0, 0.0};
  if (sigma > 0.0) {
    for (double& v : d) v = sigma * truncated_normal(rng, kJitterLimit);
  }
  const double m =
      std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + d[3] * d[3]);
  const double w = image.width;
  const double h = image.height;
  const double ax = std::clamp(x0 + d[0], 0.0, w);
  const double ay = std::clamp(y0 + d[1], 0.0, h);
  const double bx = std::clamp(x1 + d[2], 0.0, w);
  const double by = std::clamp(y1 + d[3], 0.0, h);
  if (!(bx > ax) || !(by > ay)) return std::nullopt;
  return Box2D(ax, ay, bx, by, jitter_confidence(m, sigma), label);
}

// Inverse-CDF draw from a confusion row, visiting the true class first and
// then the others by id.
inline int draw_from_row(const std::vector<double>& row, int true_class,
                         double u) {
  double acc = row[static_cast<std::size_t>(true_class)];
  if (u < acc) return true_class;
  int last = true_class;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (static_cast<int>(k) == true_class || row[k] <= 0.0) continue;
    acc += row[k];
    last = static_cast<int>(k);
    if (u < acc) return last;
  }
  return last;
}

}  // namespace wsloc::sim_internal
