#pragma once

#include <functional>
#include <vector>

#include "stochif/pde.hpp"

namespace stochif {

/// sqrt(sum_T int_T (u_h - u)^2) with a degree-5 rule; u in nominal coordinates.
double l2_error(const ScalarField& field, const std::function<double(const Vec2&)>& exact);
double l2_norm(const Mesh& mesh, const std::function<double(const Vec2&)>& u);

struct ConvergenceStudy {
  std::vector<double> h;
  std::vector<std::size_t> vertices;
  std::vector<double> error;
  /// log2 ratios between consecutive levels.
  std::vector<double> order;
  /// Least-squares slope of log(error) against log(h).
  double fitted_order = 0.0;
};

/// u = sin(pi x1) sin(pi x2) on the square with alpha = 1 and y = 0 on
/// uniform meshes h0, h0/2, ..., h0/2^refinements.
ConvergenceStudy manufactured_convergence(double h0, int refinements);

/// Relative L2 error against RadialOracle on the unit disk (r0 = 0.5) with
/// boundary value 1.
double radial_oracle_error(double alpha_i, const MeshSizing& sizing);

struct HelmholtzSetup {
  double r0 = 0.01;
  double radius = 0.055;
  double pml_thickness = 0.02;
  double pml_damping = 0.5;
  double kappa_o = 0.0;
  PmlProfile profile = PmlProfile::kQuadraticScaled;
  MeshSizing sizing;

  /// The physical constants of the scattering experiments with the verification mesh.
  static HelmholtzSetup reference();
  std::shared_ptr<const Mesh> build_mesh() const;
  DomainMap build_map(int d = 8, double p = 3.0) const;
};

struct MieCase {
  double alpha_i = 0.0;
  double ratio = 0.0;
  double fem = 0.0;
  double exact = 0.0;
  double relative_error = 0.0;
};

/// Amplitude at (r0, 0) for y = 0 against the Mie series.
std::vector<MieCase> mie_study(const HelmholtzSetup& setup,
                               const std::vector<std::pair<double, double>>& cases);

/// max |u_s| / max |u_inc| over physical nodes for alpha_i = 1, kappa_i = kappa_o
/// at a random y.
double transparent_scatterer_ratio(const HelmholtzSetup& setup, std::uint64_t seed);

struct KinkStudy {
  KinkProfile profile;
  KinkAnalysis analysis;
};

struct KinkProbeSettings {
  double offset = 0.02;
  int steps = 41;
  double gap = 0.03;
  double window = 0.2;
};

/// Segment y_2 in [-1, 1] (moves the interface radially at phi = 0) probed at
/// x0 = ((1 + offset) r0, 0). Without a crossing the analysis is taken at t = 0.6.
KinkStudy elliptic_kink_study(double alpha_i, const MeshSizing& sizing, const KinkProbeSettings& s);
KinkStudy helmholtz_kink_study(const HelmholtzSetup& setup, double alpha_i, double ratio,
                               const KinkProbeSettings& s);

}  // namespace stochif
