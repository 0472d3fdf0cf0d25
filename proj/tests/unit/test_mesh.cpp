#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "stochif/mesh.hpp"
#include "stochif/random.hpp"

using namespace stochif;

namespace {

const Mesh& square() {
  static const Mesh m = build_square_mesh(0.5, 0.125, 0.875, MeshSizing{0.04, 0.15, 0.3, 1.0});
  return m;
}

const Mesh& disk() {
  static const Mesh m = build_disk_mesh(0.01, 0.0025, 0.055, 0.02, MeshSizing{0.001, 0.004, 0.3, 1.0});
  return m;
}

std::size_t on_circle(const Mesh& m, double r) {
  std::size_t n = 0;
  for (const auto& v : m.vertices()) n += std::abs(v.norm() - r) < 1e-12 * r;
  return n;
}

}  // namespace

TEST(SquareMesh, PassesStructuralCheck) {
  const auto report = check_mesh(square());
  EXPECT_TRUE(report.ok) << (report.problems.empty() ? "" : report.problems.front());
  EXPECT_NEAR(square().total_area(), 4.0, 1e-12);
  for (std::size_t t = 0; t < square().num_triangles(); ++t) ASSERT_GT(square().signed_area(t), 0.0);
}

TEST(SquareMesh, ResolvesBreakpointCircles) {
  for (const double r : {0.125, 0.5, 0.875}) EXPECT_GE(on_circle(square(), r), 8u) << r;
}

TEST(SquareMesh, RegionsAndBandsFollowRadius) {
  const Mesh& m = square();
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const double rho = m.centroid(t).norm();
    EXPECT_EQ(m.region()[t], rho < 0.5 ? Region::kInner : Region::kOuter);
    const MapBand expected = rho < 0.125 ? MapBand::kCore
                             : rho < 0.5 ? MapBand::kRising
                             : rho < 0.875 ? MapBand::kFalling
                                           : MapBand::kExterior;
    EXPECT_EQ(m.band()[t], expected);
  }
}

TEST(SquareMesh, BoundaryNodesLieOnTheSquare) {
  const Mesh& m = square();
  ASSERT_FALSE(m.boundary_nodes().empty());
  for (const auto v : m.boundary_nodes()) {
    const Vec2& x = m.vertices()[v];
    EXPECT_NEAR(std::max(std::abs(x.x()), std::abs(x.y())), 1.0, 1e-14);
  }
}

TEST(SquareMesh, LocateInterpolatesLinearFunctionsExactly) {
  const Mesh& m = square();
  for (const Vec2& x : {Vec2(0.1, 0.2), Vec2(-0.77, 0.31), Vec2(0.5, 0.0), Vec2(-0.99, -0.99)}) {
    const auto loc = m.locate(x);
    const auto& tri = m.triangles()[loc.triangle];
    Vec2 back = Vec2::Zero();
    for (int k = 0; k < 3; ++k) back += loc.lambda[k] * m.vertices()[tri[k]];
    EXPECT_NEAR((back - x).norm(), 0.0, 1e-12);
  }
  EXPECT_THROW(m.locate(Vec2(1.5, 0.0)), OutsideDomain);
}

TEST(SquareMesh, BinaryRoundTripKeepsChecksum) {
  std::stringstream ss;
  write_mesh_binary(square(), ss);
  const Mesh back = read_mesh_binary(ss);
  EXPECT_EQ(back.num_vertices(), square().num_vertices());
  EXPECT_EQ(back.checksum(), square().checksum());
}

TEST(SquareMesh, DeterministicConstruction) {
  const Mesh again = build_square_mesh(0.5, 0.125, 0.875, MeshSizing{0.04, 0.15, 0.3, 1.0});
  EXPECT_EQ(again.checksum(), square().checksum());
}

TEST(DiskMesh, HasAbsorbingLayer) {
  const Mesh& m = disk();
  EXPECT_TRUE(check_mesh(m).ok);
  for (const double r : {0.0025, 0.01, 0.055, 0.075}) EXPECT_GE(on_circle(m, r), 8u) << r;
  std::size_t pml = 0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const double rho = m.centroid(t).norm();
    if (m.region()[t] == Region::kPml) {
      ++pml;
      EXPECT_GT(rho, 0.055);
    }
  }
  EXPECT_GT(pml, 0u);
  for (const auto v : m.boundary_nodes()) EXPECT_NEAR(m.vertices()[v].norm(), 0.075, 1e-14);
  EXPECT_NEAR(m.total_area(), std::numbers::pi * 0.075 * 0.075, 1e-3 * std::numbers::pi * 0.075 * 0.075);
}

TEST(SquareMesh, SpecSizingPassesStructuralCheck) {
  const Mesh m = build_square_mesh(0.5, 0.125, 0.875, MeshSizing{0.05, 0.1, 0.3, 1.0});
  EXPECT_TRUE(check_mesh(m).ok);
  EXPECT_NEAR(m.total_area(), 4.0, 1e-10);
}

TEST(SquareMesh, HalvingSizingQuadruplesVertices) {
  const Mesh coarse = build_square_mesh(0.5, 0.125, 0.875, MeshSizing{0.08, 0.3, 0.3, 1.0});
  const double ratio = static_cast<double>(square().num_vertices()) / coarse.num_vertices();
  EXPECT_GE(ratio, 4.0 * 0.7);
  EXPECT_LE(ratio, 4.0 * 1.3);
}

TEST(SquareMesh, LocateAtVertexAndCentroid) {
  const Mesh& m = square();
  for (const std::size_t v : {std::size_t{0}, m.num_vertices() / 3, m.num_vertices() - 1}) {
    const auto loc = m.locate(m.vertices()[v]);
    const auto& tri = m.triangles()[loc.triangle];
    const auto k = std::find(tri.begin(), tri.end(), v) - tri.begin();
    ASSERT_LT(k, 3) << v;
    EXPECT_NEAR(loc.lambda[k], 1.0, 1e-12);
  }
  for (const std::size_t t : {std::size_t{0}, m.num_triangles() / 2, m.num_triangles() - 1}) {
    const auto loc = m.locate(m.centroid(t));
    EXPECT_EQ(loc.triangle, t);
    for (const double l : loc.lambda) EXPECT_NEAR(l, 1.0 / 3.0, 1e-12);
  }
}

TEST(SquareMesh, LocateReconstructsRandomPoints) {
  const Mesh& m = square();
  const CounterRng rng(11, 0);
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const Vec2 x(rng.uniform(i, 0, -1.0, 1.0), rng.uniform(i, 1, -1.0, 1.0));
    const auto loc = m.locate(x);
    const auto& tri = m.triangles()[loc.triangle];
    Vec2 back = Vec2::Zero();
    for (int k = 0; k < 3; ++k) {
      back += loc.lambda[k] * m.vertices()[tri[k]];
      EXPECT_GE(loc.lambda[k], -1e-12);
    }
    worst = std::max(worst, (back - x).norm());
  }
  EXPECT_LE(worst, 1e-12);
}
