#pragma once

#include <array>
#include <span>

#include <Eigen/Dense>

#include "stochif/mesh.hpp"

namespace stochif::fem {

/// Quadrature node in barycentric coordinates; weights sum to one and are
/// scaled by the element area by the caller.
struct QuadPoint {
  std::array<double, 3> lambda;
  double weight;
};

/// Three interior points, exact for quadratics.
std::span<const QuadPoint> quadrature_order2();
/// Seven points, exact for quintics. Used for error norms.
std::span<const QuadPoint> quadrature_order5();

/// Linear triangle with constant barycentric gradients.
struct Element {
  std::array<Vec2, 3> x;
  Eigen::Matrix<double, 3, 2> grad;
  double area = 0.0;

  Vec2 point(const std::array<double, 3>& lambda) const {
    return lambda[0] * x[0] + lambda[1] * x[1] + lambda[2] * x[2];
  }
};

Element element(const Mesh& mesh, std::size_t t);

}  // namespace stochif::fem
