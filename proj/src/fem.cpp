#include "stochif/fem.hpp"

#include <cmath>

namespace stochif::fem {

namespace {

constexpr double kA1 = 0.059715871789769820;
constexpr double kB1 = 0.470142064105115090;
constexpr double kW1 = 0.132394152788506181;
constexpr double kA2 = 0.797426985353087322;
constexpr double kB2 = 0.101286507323456339;
constexpr double kW2 = 0.125939180544827153;

const std::array<QuadPoint, 3> kOrder2{{
    {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}, 1.0 / 3.0},
}};

const std::array<QuadPoint, 7> kOrder5{{
    {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 0.225},
    {{kA1, kB1, kB1}, kW1},
    {{kB1, kA1, kB1}, kW1},
    {{kB1, kB1, kA1}, kW1},
    {{kA2, kB2, kB2}, kW2},
    {{kB2, kA2, kB2}, kW2},
    {{kB2, kB2, kA2}, kW2},
}};

}  // namespace

std::span<const QuadPoint> quadrature_order2() { return kOrder2; }
std::span<const QuadPoint> quadrature_order5() { return kOrder5; }

Element element(const Mesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles()[t];
  Element e;
  for (int k = 0; k < 3; ++k) e.x[k] = mesh.vertices()[tri[k]];
  const Vec2 e1 = e.x[1] - e.x[0];
  const Vec2 e2 = e.x[2] - e.x[0];
  const double det = e1.x() * e2.y() - e1.y() * e2.x();
  e.area = 0.5 * det;
  // Rows are grad lambda_k.
  e.grad(1, 0) = e2.y() / det;
  e.grad(1, 1) = -e2.x() / det;
  e.grad(2, 0) = -e1.y() / det;
  e.grad(2, 1) = e1.x() / det;
  e.grad.row(0) = -e.grad.row(1) - e.grad.row(2);
  return e;
}

}  // namespace stochif::fem
