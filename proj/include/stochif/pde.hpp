#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "stochif/geometry.hpp"
#include "stochif/linalg.hpp"
#include "stochif/mesh.hpp"

namespace stochif {

/// Physical-space scalar function.
using SpatialFunction = std::function<double(const Vec2&)>;

/// 20 + 10 sin(x1) - 5 exp(x1 x2).
double default_source(const Vec2& x);

/// P1 nodal values on a mesh. Real fields leave `imag` empty.
struct ScalarField {
  std::shared_ptr<const Mesh> mesh;
  std::vector<double> real;
  std::vector<double> imag;
  /// Nodes inside the absorbing layer; their values are the scattered field only.
  std::vector<std::uint8_t> pml_node;

  bool is_complex() const { return !imag.empty(); }
  std::complex<double> value(std::size_t node) const {
    return {real[node], is_complex() ? imag[node] : 0.0};
  }
};

/// x1, x2, value[, imag] per vertex.
void write_field_csv(const ScalarField& field, std::ostream& out);

struct TransformedCoefficients {
  Mat2 a;
  double det = 1.0;
};

/// A = J^{-1} J^{-T} det(J) alpha with J the one-sided Jacobian on `band`.
TransformedCoefficients transformed_coefficients(const DomainMap& map, std::span<const double> y,
                                                 const Vec2& xh, MapBand band, double alpha);

struct EllipticProblem {
  std::shared_ptr<const Mesh> mesh;
  DomainMap map;
  double alpha_i = 10.0;
  double alpha_o = 1.0;
  SpatialFunction source = default_source;
  /// Dirichlet data in physical coordinates; null means homogeneous.
  SpatialFunction dirichlet;
  CgOptions solver;

  EllipticProblem(std::shared_ptr<const Mesh> mesh, DomainMap map, double alpha_i);
};

/// Reduced system on the free nodes.
struct EllipticSystem {
  CsrMatrix<double> matrix;
  std::vector<double> rhs;
  /// Free-node index per vertex, -1 for Dirichlet nodes.
  std::vector<std::int64_t> free_index;
  std::vector<double> boundary_values;
};

EllipticSystem assemble_elliptic(const EllipticProblem& pb, std::span<const double> y);

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Throws SolverError naming y on CG failure.
ScalarField solve_elliptic(const EllipticProblem& pb, std::span<const double> y,
                           SolveStats* stats = nullptr);

/// Imaginary radial stretch in the absorbing layer, xi = (rho - R) / t.
enum class PmlProfile {
  /// rho + i (sigma0 / kappa_o) xi^2. One-way attenuation exp(-sigma0).
  kQuadratic,
  /// rho + i (sigma0 / kappa_o) (kappa_o t)^2 xi^2. One-way attenuation
  /// exp(-sigma0 (kappa_o t)^2).
  kQuadraticScaled,
};

struct HelmholtzProblem {
  std::shared_ptr<const Mesh> mesh;
  DomainMap map;
  double alpha_i = 10.0;
  double kappa_o = 0.0;
  double kappa_i = 0.0;
  Vec2 direction = Vec2(1.0, 0.0);
  /// Inner radius of the absorbing layer and its thickness.
  double radius = 0.055;
  double pml_thickness = 0.02;
  double pml_damping = 0.5;
  PmlProfile pml_profile = PmlProfile::kQuadraticScaled;

  /// Checks kappa_i^2 / kappa_o^2 <= alpha_i and that the mesh carries the layer.
  HelmholtzProblem(std::shared_ptr<const Mesh> mesh, DomainMap map, double alpha_i,
                   double kappa_o, double kappa_i);

  /// Complex stretched radius and its derivative at rho >= radius.
  std::pair<Complex, Complex> stretch(double rho) const;
};

struct HelmholtzSystem {
  CsrMatrix<Complex> matrix;
  std::vector<Complex> rhs;
  std::vector<std::int64_t> free_index;
};

HelmholtzSystem assemble_helmholtz(const HelmholtzProblem& pb, std::span<const double> y);

/// Total field on physical nodes, scattered field on layer nodes.
ScalarField solve_helmholtz(const HelmholtzProblem& pb, std::span<const double> y);

/// Incident plane wave exp(i kappa_o d . x).
Complex incident_wave(const HelmholtzProblem& pb, const Vec2& x);

enum class QoiKind { kValue, kAmplitude };

/// Pulls each physical point back through the map, locates it on the mesh and
/// interpolates. Throws OutsideDomain.
std::vector<double> evaluate_qoi(const ScalarField& field, const DomainMap& map,
                                 std::span<const double> y, std::span<const Vec2> points,
                                 QoiKind kind);

/// radius (cos(2 pi i / n), sin(2 pi i / n)), i = 0..n-1.
std::vector<Vec2> circle_points(double radius, int n);

/// q(y) at one physical point for either problem.
using ScalarQoi = std::function<double(std::span<const double>)>;

ScalarQoi elliptic_point_qoi(const EllipticProblem& pb, const Vec2& x0);
ScalarQoi helmholtz_point_qoi(const HelmholtzProblem& pb, const Vec2& x0);

/// q along y(t) = y_a + t (y_b - y_a) on a uniform grid of n_steps points in [0, 1]
/// with first and second central differences (NaN at the ends).
struct KinkProfile {
  std::vector<double> t;
  std::vector<double> q;
  std::vector<double> d1;
  std::vector<double> d2;
  /// Parameter of the crossing with the kink hyperplane, NaN if none.
  double t_cross = 0.0;
};

KinkProfile probe_kink(const ScalarQoi& qoi, const DomainMap& map, std::span<const double> y_a,
                       std::span<const double> y_b, const Vec2& x0, int n_steps);

/// One-sided derivative mismatch at a point of a profile. Quadratics are fitted
/// by least squares to the samples in [s - window, s - gap] and [s + gap, s + window];
/// the jumps are the differences of their first and second derivatives at s.
struct DerivativeJump {
  double d1 = 0.0;
  double d2 = 0.0;
};

DerivativeJump derivative_jump(const KinkProfile& profile, double s, double gap, double window);

struct KinkAnalysis {
  DerivativeJump at_crossing;
  /// Largest jumps over reference points away from the crossing.
  DerivativeJump baseline;
  /// at_crossing / baseline.
  double d1_ratio = 0.0;
  double d2_ratio = 0.0;
  /// |first-derivative jump| / max |q'| over the profile.
  double d1_relative = 0.0;
};

KinkAnalysis analyze_kink(const KinkProfile& profile, double gap, double window);

}  // namespace stochif
