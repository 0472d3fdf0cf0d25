#include <cmath>
#include <memory>
#include <numbers>

#include <gtest/gtest.h>

#include "stochif/config.hpp"
#include "stochif/oracles.hpp"
#include "stochif/pde.hpp"
#include "stochif/random.hpp"
#include "stochif/verification.hpp"

using namespace stochif;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const Mesh> small_square() {
  static const auto m =
      std::make_shared<const Mesh>(build_square_mesh(0.5, 0.125, 0.875, MeshSizing{0.02, 0.06, 0.3, 1.0}));
  return m;
}

DomainMap square_map(int d = 8) {
  return DomainMap(InterfaceModel(InterfaceParams{0.5, d, 3.0, 0.08, true}), MapParams{0.125, 0.875});
}

std::vector<double> random_y(int d, std::uint64_t index) {
  const CounterRng rng(17, 0);
  std::vector<double> y(d);
  for (int j = 0; j < d; ++j) y[j] = rng.uniform(index, j, -1.0, 1.0);
  return y;
}

// Laplacian by the five-point stencil.
std::complex<double> laplacian_fd(const MieScatterer& m, const Vec2& x, double h) {
  const auto u = [&](double dx, double dy) { return m.total_field(x + Vec2(dx, dy)); };
  return (u(h, 0) + u(-h, 0) + u(0, h) + u(0, -h) - 4.0 * u(0, 0)) / (h * h);
}

}  // namespace

TEST(DefaultSource, Values) {
  EXPECT_DOUBLE_EQ(default_source(Vec2(0.0, 0.0)), 15.0);
  EXPECT_NEAR(default_source(Vec2(1.0, 1.0)), 20.0 + 10.0 * std::sin(1.0) - 5.0 * std::exp(1.0), 1e-14);
}

TEST(TransformedCoefficients, IdentityMapGivesScaledIdentity) {
  const auto map = square_map();
  const std::vector<double> y(8, 0.0);
  const auto c = transformed_coefficients(map, y, Vec2(0.3, 0.2), MapBand::kRising, 10.0);
  EXPECT_TRUE(c.a.isApprox(10.0 * Mat2::Identity()));
  EXPECT_DOUBLE_EQ(c.det, 1.0);
}

TEST(TransformedCoefficients, IdentityOutsideTheMappedDisk) {
  const auto map = square_map();
  const auto y = random_y(8, 3);
  const auto c = transformed_coefficients(map, y, Vec2(0.9, 0.2), MapBand::kExterior, 1.0);
  EXPECT_TRUE(c.a.isApprox(Mat2::Identity(), 1e-14));
  EXPECT_DOUBLE_EQ(c.det, 1.0);
}

TEST(TransformedCoefficients, SymmetricPositiveDefinite) {
  const auto map = square_map();
  for (std::uint64_t n = 0; n < 50; ++n) {
    const auto y = random_y(8, n);
    const Vec2 xh(0.2 + 0.01 * static_cast<double>(n), 0.1);
    const auto c = transformed_coefficients(map, y, xh, map.band_of(xh.norm()), 1.0);
    EXPECT_NEAR(c.a(0, 1), c.a(1, 0), 1e-14);
    EXPECT_GT(c.a.determinant(), 0.0);
    EXPECT_GT(c.a.trace(), 0.0);
    EXPECT_GT(c.det, 0.0);
  }
}

TEST(Elliptic, AssembledMatrixIsSymmetric) {
  EllipticProblem pb(small_square(), square_map(), 10.0);
  const auto sys = assemble_elliptic(pb, random_y(8, 2));
  const auto& m = sys.matrix;
  EXPECT_TRUE(m.is_structurally_symmetric());
  for (std::size_t i = 0; i < m.rows(); i += 37) {
    for (std::uint32_t k = m.row_offsets()[i]; k < m.row_offsets()[i + 1]; ++k) {
      const auto j = m.col_indices()[k];
      double back = 0.0;
      for (std::uint32_t l = m.row_offsets()[j]; l < m.row_offsets()[j + 1]; ++l)
        if (m.col_indices()[l] == i) back = m.values()[l];
      EXPECT_NEAR(m.values()[k], back, 1e-12 * m.max_abs());
    }
  }
}

TEST(Elliptic, UniformCoefficientIgnoresInterface) {
  EllipticProblem pb(small_square(), square_map(), 1.0);
  const Vec2 x0(0.3, 0.4);
  const auto q = elliptic_point_qoi(pb, x0);
  const double ref = q(std::vector<double>(8, 0.0));
  for (std::uint64_t n = 0; n < 3; ++n) EXPECT_NEAR(q(random_y(8, n)), ref, 2e-3 * std::abs(ref));
}

TEST(Elliptic, MatchesRadialOracle) {
  const MeshSizing sizing{0.02, 0.05, 0.3, 1.0};
  EXPECT_LE(radial_oracle_error(10.0, sizing), 5e-3);
  EXPECT_LE(radial_oracle_error(0.1, sizing), 5e-3);
}

TEST(Elliptic, SecondOrderL2Convergence) {
  const auto study = manufactured_convergence(0.1, 2);
  ASSERT_EQ(study.order.size(), 2u);
  EXPECT_GE(study.fitted_order, 1.8);
  EXPECT_LE(study.fitted_order, 2.2);
}

TEST(Elliptic, HigherContrastRaisesOuterValue) {
  const Vec2 x0(0.6, 0.0);
  const std::vector<double> y(8, 0.0);
  const double low = elliptic_point_qoi(EllipticProblem(small_square(), square_map(), 1.0), x0)(y);
  const double high = elliptic_point_qoi(EllipticProblem(small_square(), square_map(), 100.0), x0)(y);
  EXPECT_GT(low, 0.0);
  EXPECT_LT(high, low);
}

TEST(Qoi, OutsidePointThrows) {
  EllipticProblem pb(small_square(), square_map(), 10.0);
  const std::vector<double> y(8, 0.0);
  const auto field = solve_elliptic(pb, y);
  const std::vector<Vec2> pts{Vec2(1.5, 0.0)};
  EXPECT_THROW(evaluate_qoi(field, pb.map, y, pts, QoiKind::kValue), OutsideDomain);
}

TEST(Qoi, VertexGivesNodalValue) {
  EllipticProblem pb(small_square(), square_map(), 10.0);
  const std::vector<double> y(8, 0.0);
  const auto field = solve_elliptic(pb, y);
  const auto& verts = small_square()->vertices();
  for (const std::size_t v : {std::size_t{5}, verts.size() / 2}) {
    const std::vector<Vec2> pts{verts[v]};
    EXPECT_NEAR(evaluate_qoi(field, pb.map, y, pts, QoiKind::kValue)[0], field.real[v], 1e-13);
  }
}

TEST(Qoi, IncidentWaveHasUnitAmplitude) {
  auto s = HelmholtzSetup::reference();
  s.sizing = MeshSizing{0.002, 0.008, 0.3, 1.0};
  const HelmholtzProblem pb(s.build_mesh(), s.build_map(), 10.0, reference_wavenumber(), 0.8 * reference_wavenumber());
  for (const Vec2& x : {Vec2(0.0, 0.0), Vec2(0.013, -0.04), Vec2(-0.05, 0.02)})
    EXPECT_NEAR(std::abs(incident_wave(pb, x)), 1.0, 1e-15);
}

TEST(Qoi, CirclePoints) {
  const auto pts = circle_points(0.5, 4);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_NEAR((pts[1] - Vec2(0.0, 0.5)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((pts[2] - Vec2(-0.5, 0.0)).norm(), 0.0, 1e-15);
}

TEST(Helmholtz, RejectsTrappingContrast) {
  const auto setup = HelmholtzSetup::reference();
  MeshSizing coarse{0.002, 0.008, 0.3, 1.0};
  auto s = setup;
  s.sizing = coarse;
  const auto mesh = s.build_mesh();
  const double k = reference_wavenumber();
  EXPECT_THROW(HelmholtzProblem(mesh, s.build_map(), 0.5, k, k), std::invalid_argument);
  EXPECT_NO_THROW(HelmholtzProblem(mesh, s.build_map(), 1.0, k, k));
}

TEST(Helmholtz, StretchIsRealInsideAndDampedOutside) {
  auto s = HelmholtzSetup::reference();
  s.sizing = MeshSizing{0.002, 0.008, 0.3, 1.0};
  const HelmholtzProblem pb(s.build_mesh(), s.build_map(), 10.0, reference_wavenumber(), 0.8 * reference_wavenumber());
  const auto [z0, dz0] = pb.stretch(pb.radius);
  EXPECT_DOUBLE_EQ(z0.real(), pb.radius);
  EXPECT_DOUBLE_EQ(z0.imag(), 0.0);
  EXPECT_DOUBLE_EQ(dz0.real(), 1.0);
  const auto [z1, dz1] = pb.stretch(pb.radius + pb.pml_thickness);
  EXPECT_GT(z1.imag(), 0.0);
  EXPECT_DOUBLE_EQ(z1.real(), pb.radius + pb.pml_thickness);
  EXPECT_GT(dz1.imag(), 0.0);
}

TEST(Mie, InterfaceTransmissionConditions) {
  const double k = reference_wavenumber();
  for (const double alpha : {10.0, 100.0}) {
    const MieScatterer m{0.01, alpha, 0.8 * k, k, Vec2(1.0, 0.0)};
    for (const double phi : {0.0, 1.0, 2.5}) {
      const Vec2 e(std::cos(phi), std::sin(phi));
      const double h = 1e-9;
      const auto in = m.total_field((m.r0 - h) * e);
      const auto out = m.total_field((m.r0 + h) * e);
      EXPECT_LE(std::abs(in - out), 1e-5 * std::abs(out)) << alpha << " " << phi;
      const double dh = 1e-6;
      const auto din = (m.total_field((m.r0 - dh) * e) - m.total_field((m.r0 - 2 * dh) * e)) / dh;
      const auto dout = (m.total_field((m.r0 + 2 * dh) * e) - m.total_field((m.r0 + dh) * e)) / dh;
      EXPECT_LE(std::abs(alpha * din - dout), 2e-3 * std::abs(dout) + 1e-6 * k) << alpha << " " << phi;
    }
  }
}

TEST(Mie, SatisfiesHelmholtzOnBothSides) {
  const double k = reference_wavenumber();
  const MieScatterer m{0.01, 10.0, 0.8 * k, k, Vec2(1.0, 0.0)};
  const double h = 2e-5;
  for (const Vec2& x : {Vec2(0.004, 0.002), Vec2(-0.002, -0.006)}) {
    const auto u = m.total_field(x);
    const auto r = m.alpha_i * laplacian_fd(m, x, h) + m.kappa_i * m.kappa_i * u;
    EXPECT_LE(std::abs(r), 1e-3 * m.kappa_i * m.kappa_i * std::abs(u));
  }
  for (const Vec2& x : {Vec2(0.02, 0.01), Vec2(-0.03, 0.005)}) {
    const auto u = m.total_field(x);
    const auto r = laplacian_fd(m, x, h) + k * k * u;
    EXPECT_LE(std::abs(r), 1e-3 * k * k * std::abs(u));
  }
}

TEST(Mie, TransparentDiskGivesIncidentWave) {
  const double k = reference_wavenumber();
  const MieScatterer m{0.01, 1.0, k, k, Vec2(0.6, 0.8)};
  for (const Vec2& x : {Vec2(0.003, 0.0), Vec2(0.02, -0.01)}) {
    const auto inc = std::exp(std::complex<double>(0.0, k * m.direction.dot(x)));
    EXPECT_NEAR(std::abs(m.total_field(x) - inc), 0.0, 1e-10);
  }
}

TEST(Helmholtz, CoarseSolveApproximatesMieSeries) {
  auto s = HelmholtzSetup::reference();
  s.sizing = MeshSizing{0.0008, 0.004, 0.3, 2.0};
  const auto cases = mie_study(s, {{10.0, 0.8}});
  ASSERT_EQ(cases.size(), 1u);
  EXPECT_TRUE(std::isfinite(cases[0].fem));
  EXPECT_LE(cases[0].relative_error, 0.1);
}

TEST(Kink, SyntheticAbsoluteValueProfile) {
  const DomainMap map(InterfaceModel(InterfaceParams{0.5, 8, 1.0, 0.08, true}), MapParams{0.125, 0.875});
  const Vec2 x0(0.52, 0.0);
  const auto plane = map.kink_hyperplane(x0);
  ASSERT_TRUE(plane.has_value());
  std::vector<double> ya(8, 0.0), yb(8, 0.0);
  ya[1] = -1.0;
  yb[1] = 1.0;
  const ScalarQoi qoi = [&](std::span<const double> y) {
    double g = -plane->offset;
    for (int j = 0; j < 8; ++j) g += plane->normal[j] * y[j];
    return std::abs(g) + 0.3 * y[1] * y[1];
  };
  const auto profile = probe_kink(qoi, map, ya, yb, x0, 81);
  const double slope = 2.0 * plane->normal[1];
  EXPECT_NEAR(profile.t_cross, 0.5 + plane->offset / slope, 1e-14);
  const auto a = analyze_kink(profile, 0.02, 0.2);
  EXPECT_NEAR(a.at_crossing.d1, 2.0 * slope, 1e-10);
  EXPECT_NEAR(a.at_crossing.d2, 0.0, 1e-8);
  EXPECT_LE(a.baseline.d1, 1e-10);
  EXPECT_GT(a.d1_ratio, 1e6);
}

TEST(Kink, NoCrossingIsRejected) {
  const auto map = square_map();
  KinkProfile p;
  p.t = {0.0, 0.5, 1.0};
  p.q = {0.0, 0.0, 0.0};
  p.t_cross = std::nan("");
  EXPECT_THROW(analyze_kink(p, 0.01, 0.1), std::invalid_argument);
  EXPECT_FALSE(map.kink_hyperplane(Vec2(0.9, 0.0)).has_value());
}
