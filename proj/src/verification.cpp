#include "stochif/verification.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "stochif/fem.hpp"
#include "stochif/oracles.hpp"
#include "stochif/random.hpp"

namespace stochif {

namespace {

constexpr double kPi = std::numbers::pi;

double integrate_squared(const Mesh& mesh, const std::function<double(std::size_t, const std::array<double, 3>&,
                                                                      const Vec2&)>& g) {
  double sum = 0.0;
  const auto rule = fem::quadrature_order5();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto e = fem::element(mesh, t);
    double local = 0.0;
    for (const auto& q : rule) {
      const double v = g(t, q.lambda, e.point(q.lambda));
      local += q.weight * v * v;
    }
    sum += e.area * local;
  }
  return std::sqrt(sum);
}

// y_2 runs over [-1, 1]; the other entries are fixed.
std::pair<std::vector<double>, std::vector<double>> kink_segment() {
  std::vector<double> ya(8, 0.0);
  ya[0] = 0.5;
  ya[3] = 0.3;
  auto yb = ya;
  ya[1] = -1.0;
  yb[1] = 1.0;
  return {ya, yb};
}

KinkStudy finish(KinkProfile profile, const KinkProbeSettings& s) {
  if (!std::isfinite(profile.t_cross)) profile.t_cross = 0.6;
  KinkStudy study;
  study.analysis = analyze_kink(profile, s.gap, s.window);
  study.profile = std::move(profile);
  return study;
}

}  // namespace

double l2_error(const ScalarField& field, const std::function<double(const Vec2&)>& exact) {
  const Mesh& mesh = *field.mesh;
  return integrate_squared(mesh, [&](std::size_t t, const std::array<double, 3>& lambda, const Vec2& x) {
    const auto& tri = mesh.triangles()[t];
    double uh = 0.0;
    for (int k = 0; k < 3; ++k) uh += lambda[k] * field.real[tri[k]];
    return uh - exact(x);
  });
}

double l2_norm(const Mesh& mesh, const std::function<double(const Vec2&)>& u) {
  return integrate_squared(mesh, [&](std::size_t, const std::array<double, 3>&, const Vec2& x) { return u(x); });
}

ConvergenceStudy manufactured_convergence(double h0, int refinements) {
  InterfaceParams ip;
  const DomainMap map(InterfaceModel(ip), MapParams{0.125, 0.875});
  const std::vector<double> y(ip.d, 0.0);
  const auto exact = [](const Vec2& x) { return std::sin(kPi * x.x()) * std::sin(kPi * x.y()); };

  ConvergenceStudy study;
  double h = h0;
  for (int level = 0; level <= refinements; ++level, h *= 0.5) {
    MeshSizing sizing;
    sizing.h_interface = h;
    sizing.h_far = h;
    auto mesh = std::make_shared<const Mesh>(build_square_mesh(0.5, 0.125, 0.875, sizing));
    EllipticProblem pb(mesh, map, 1.0);
    pb.source = [&](const Vec2& x) { return 2.0 * kPi * kPi * exact(x); };
    const auto field = solve_elliptic(pb, y);
    study.h.push_back(h);
    study.vertices.push_back(mesh->num_vertices());
    study.error.push_back(l2_error(field, exact));
  }

  for (std::size_t k = 1; k < study.error.size(); ++k)
    study.order.push_back(std::log(study.error[k - 1] / study.error[k]) / std::log(study.h[k - 1] / study.h[k]));

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(study.h.size());
  for (std::size_t k = 0; k < study.h.size(); ++k) {
    const double lx = std::log(study.h[k]);
    const double ly = std::log(study.error[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  study.fitted_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return study;
}

double radial_oracle_error(double alpha_i, const MeshSizing& sizing) {
  const RadialOracle oracle{0.5, 1.0, alpha_i, 1.0, 1.0};
  InterfaceParams ip;
  const DomainMap map(InterfaceModel(ip), MapParams{0.125, 0.875});
  const std::vector<double> y(ip.d, 0.0);
  auto mesh = std::make_shared<const Mesh>(build_disk_mesh(0.5, 0.125, 1.0, 0.0, sizing));
  EllipticProblem pb(mesh, map, alpha_i);
  pb.source = [](const Vec2&) { return 1.0; };
  pb.dirichlet = [&](const Vec2& x) { return oracle.value(std::min(x.norm(), oracle.radius)); };
  const auto field = solve_elliptic(pb, y);
  const auto exact = [&](const Vec2& x) { return oracle.value(std::min(x.norm(), oracle.radius)); };
  return l2_error(field, exact) / l2_norm(*mesh, exact);
}

HelmholtzSetup HelmholtzSetup::reference() {
  HelmholtzSetup s;
  s.kappa_o = 200.0 * kPi / 3.0;
  s.sizing.h_interface = 0.0004;
  s.sizing.h_far = 0.0006;
  return s;
}

std::shared_ptr<const Mesh> HelmholtzSetup::build_mesh() const {
  return std::make_shared<const Mesh>(build_disk_mesh(r0, r0 / 4.0, radius, pml_thickness, sizing));
}

DomainMap HelmholtzSetup::build_map(int d, double p) const {
  InterfaceParams ip;
  ip.r0 = r0;
  ip.d = d;
  ip.p = p;
  return DomainMap(InterfaceModel(ip), MapParams{r0 / 4.0, radius});
}

std::vector<MieCase> mie_study(const HelmholtzSetup& setup,
                               const std::vector<std::pair<double, double>>& cases) {
  const auto mesh = setup.build_mesh();
  const auto map = setup.build_map();
  const std::vector<double> y(map.interface().dimension(), 0.0);
  const Vec2 x(setup.r0, 0.0);

  std::vector<MieCase> out;
  for (const auto& [alpha_i, ratio] : cases) {
    HelmholtzProblem pb(mesh, map, alpha_i, setup.kappa_o, ratio * setup.kappa_o);
    pb.pml_damping = setup.pml_damping;
    pb.pml_profile = setup.profile;
    const auto field = solve_helmholtz(pb, y);
    MieCase c;
    c.alpha_i = alpha_i;
    c.ratio = ratio;
    c.fem = evaluate_qoi(field, map, y, std::span<const Vec2>(&x, 1), QoiKind::kAmplitude)[0];
    const MieScatterer mie{setup.r0, alpha_i, ratio * setup.kappa_o, setup.kappa_o};
    c.exact = std::abs(mie.total_field(x));
    c.relative_error = std::abs(c.fem - c.exact) / c.exact;
    out.push_back(c);
  }
  return out;
}

double transparent_scatterer_ratio(const HelmholtzSetup& setup, std::uint64_t seed) {
  const auto mesh = setup.build_mesh();
  const auto map = setup.build_map();
  const CounterRng rng(seed, 0);
  std::vector<double> y(map.interface().dimension());
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = rng.uniform(0, j, -1.0, 1.0);

  HelmholtzProblem pb(mesh, map, 1.0, setup.kappa_o, setup.kappa_o);
  pb.pml_damping = setup.pml_damping;
  pb.pml_profile = setup.profile;
  const auto field = solve_helmholtz(pb, y);
  double scattered = 0.0;
  double incident = 0.0;
  for (std::size_t v = 0; v < mesh->num_vertices(); ++v) {
    if (field.pml_node[v]) continue;
    const Complex u_inc = incident_wave(pb, map.forward(y, mesh->vertices()[v]));
    scattered = std::max(scattered, std::abs(field.value(v) - u_inc));
    incident = std::max(incident, std::abs(u_inc));
  }
  return scattered / incident;
}

KinkStudy elliptic_kink_study(double alpha_i, const MeshSizing& sizing, const KinkProbeSettings& s) {
  InterfaceParams ip;
  const DomainMap map(InterfaceModel(ip), MapParams{0.125, 0.875});
  auto mesh = std::make_shared<const Mesh>(build_square_mesh(0.5, 0.125, 0.875, sizing));
  const EllipticProblem pb(mesh, map, alpha_i);
  const Vec2 x0((1.0 + s.offset) * ip.r0, 0.0);
  const auto [ya, yb] = kink_segment();
  return finish(probe_kink(elliptic_point_qoi(pb, x0), map, ya, yb, x0, s.steps), s);
}

KinkStudy helmholtz_kink_study(const HelmholtzSetup& setup, double alpha_i, double ratio,
                               const KinkProbeSettings& s) {
  const auto mesh = setup.build_mesh();
  const auto map = setup.build_map();
  HelmholtzProblem pb(mesh, map, alpha_i, setup.kappa_o, ratio * setup.kappa_o);
  pb.pml_damping = setup.pml_damping;
  pb.pml_profile = setup.profile;
  const Vec2 x0((1.0 + s.offset) * setup.r0, 0.0);
  const auto [ya, yb] = kink_segment();
  return finish(probe_kink(helmholtz_point_qoi(pb, x0), map, ya, yb, x0, s.steps), s);
}

}  // namespace stochif
