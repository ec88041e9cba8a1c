#pragma once

#include "strandkit/strand.hpp"

#include <cmath>

namespace strandkit::testing {

// Analytic helix (r cos t, r sin t, b t), t = t0 + i * step.
inline Strand helix(int n, double r, double b, double step, double t0 = 0.0) {
  Strand s(n, 3);
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * step;
    s.row(i) << r * std::cos(t), r * std::sin(t), b * t;
  }
  return s;
}

inline Strand straight(int n, const Eigen::RowVector3d& start, const Eigen::RowVector3d& step) {
  Strand s(n, 3);
  for (int i = 0; i < n; ++i) s.row(i) = start + double(i) * step;
  return s;
}

// Random walk with small steps; coordinates are multiples of 2^-10 so sums
// and differences are exact in double.
inline Strand dyadic_walk(int n, Rng& rng) {
  Strand s(n, 3);
  s.row(0) << std::floor(rng.uniform(-64, 64)), std::floor(rng.uniform(-64, 64)), std::floor(rng.uniform(-64, 64));
  s.row(0) *= 0x1.0p-10;
  for (int i = 1; i < n; ++i)
    for (int c = 0; c < 3; ++c) s(i, c) = s(i - 1, c) + std::floor(rng.uniform(-8, 9)) * 0x1.0p-10;
  return s;
}

inline Strand random_strand(int n, Rng& rng, double scale = 0.01) {
  Strand s(n, 3);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) s(i, c) = rng.uniform(-scale, scale);
  return s;
}

}  // namespace strandkit::testing
