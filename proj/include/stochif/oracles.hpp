#pragma once

#include <complex>

#include "stochif/geometry.hpp"

namespace stochif {

/// Exact solution of -div(alpha grad u) = 1 on a disk of radius `radius` with
/// u = boundary_value on its edge, alpha = alpha_i for rho < r0 and alpha_o beyond.
struct RadialOracle {
  double r0 = 0.5;
  double radius = 1.0;
  double alpha_i = 10.0;
  double alpha_o = 1.0;
  double boundary_value = 0.0;

  double value(double rho) const;
  double operator()(const Vec2& x) const { return value(x.norm()); }
};

/// Plane wave exp(i kappa_o d.x) scattered by the penetrable disk of radius r0
/// where -div(alpha_i grad u) - kappa_i^2 u = 0; background has alpha = 1.
struct MieScatterer {
  double r0 = 0.01;
  double alpha_i = 10.0;
  double kappa_i = 0.0;
  double kappa_o = 0.0;
  Vec2 direction = Vec2(1.0, 0.0);

  /// Total field from the cylindrical-harmonic series, truncated once the
  /// terms fall below tail * (partial sum).
  std::complex<double> total_field(const Vec2& x, double tail = 1e-12) const;
  /// Modal coefficients (interior c_n, scattered a_n) without the i^n factor.
  std::pair<std::complex<double>, std::complex<double>> coefficients(int n) const;
};

}  // namespace stochif
