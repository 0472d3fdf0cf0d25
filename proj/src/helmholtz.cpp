#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "stochif/fem.hpp"
#include "stochif/pde.hpp"

namespace stochif {

namespace {

using Mat2c = Eigen::Matrix<Complex, 2, 2>;
using Vec3c = Eigen::Matrix<Complex, 3, 1>;
using Mat3c = Eigen::Matrix<Complex, 3, 3>;

constexpr Complex kI(0.0, 1.0);

}  // namespace

HelmholtzProblem::HelmholtzProblem(std::shared_ptr<const Mesh> mesh_, DomainMap map_, double alpha_i_,
                                   double kappa_o_, double kappa_i_)
    : mesh(std::move(mesh_)), map(std::move(map_)), alpha_i(alpha_i_), kappa_o(kappa_o_), kappa_i(kappa_i_) {
  if (!mesh) throw std::invalid_argument("Helmholtz problem needs a mesh");
  if (!(alpha_i > 0.0 && kappa_o > 0.0 && kappa_i > 0.0))
    throw std::invalid_argument("alpha_i, kappa_i and kappa_o must be positive");
  if (kappa_i * kappa_i > alpha_i * kappa_o * kappa_o * (1.0 + 1e-12))
    throw std::invalid_argument(fmt::format(
        "nontrapping condition violated: kappa_i^2 / kappa_o^2 = {:.6g} > alpha_i = {:.6g}",
        kappa_i * kappa_i / (kappa_o * kappa_o), alpha_i));
  radius = mesh->circles().r_outer;
  pml_thickness = mesh->circles().r_pml - radius;
  if (!(pml_thickness > 0.0)) throw std::invalid_argument("Helmholtz mesh has no absorbing layer");
  if (map.r_outer() > radius * (1.0 + 1e-12))
    throw std::invalid_argument("mollifier support must end inside the absorbing layer radius");
}

std::pair<Complex, Complex> HelmholtzProblem::stretch(double rho) const {
  const double xi = std::max(rho - radius, 0.0) / pml_thickness;
  double scale = pml_damping / kappa_o;
  if (pml_profile == PmlProfile::kQuadraticScaled) scale *= std::pow(kappa_o * pml_thickness, 2);
  const Complex rho_t = rho + kI * scale * xi * xi;
  const Complex s = 1.0 + kI * scale * 2.0 * xi / pml_thickness;
  return {rho_t, s};
}

Complex incident_wave(const HelmholtzProblem& pb, const Vec2& x) {
  return std::exp(kI * pb.kappa_o * pb.direction.dot(x));
}

HelmholtzSystem assemble_helmholtz(const HelmholtzProblem& pb, std::span<const double> y) {
  const Mesh& mesh = *pb.mesh;
  const std::size_t nv = mesh.num_vertices();

  HelmholtzSystem sys;
  sys.free_index.assign(nv, -1);
  std::int64_t n_free = 0;
  for (std::size_t v = 0; v < nv; ++v) {
    if (!mesh.is_boundary()[v]) sys.free_index[v] = n_free++;
  }
  sys.rhs.assign(static_cast<std::size_t>(n_free), Complex(0.0));
  std::vector<Triplet<Complex>> triplets;
  triplets.reserve(9 * mesh.num_triangles());

  const double ko2 = pb.kappa_o * pb.kappa_o;
  const double ki2 = pb.kappa_i * pb.kappa_i;
  const Vec2 dir = pb.direction;
  const auto rule = fem::quadrature_order2();

  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto e = fem::element(mesh, t);
    const Region region = mesh.region()[t];
    const MapBand band = mesh.band()[t];

    Mat2c stiff = Mat2c::Zero();
    Mat3c mass = Mat3c::Zero();
    Vec3c load = Vec3c::Zero();
    for (const auto& q : rule) {
      const Vec2 xh = e.point(q.lambda);
      Complex m;
      if (region == Region::kPml) {
        const double rho = xh.norm();
        const auto [rho_t, s] = pb.stretch(rho);
        const Vec2 er = xh / rho;
        const Vec2 ephi(-er.y(), er.x());
        const Mat2 prr = er * er.transpose();
        const Mat2 ppp = ephi * ephi.transpose();
        stiff += q.weight * (rho_t / (s * rho) * prr.cast<Complex>() + s * rho / rho_t * ppp.cast<Complex>());
        m = ko2 * s * rho_t / rho;
      } else {
        const auto ev = pb.map.evaluate(y, xh, band);
        const double det = ev.jacobian.determinant();
        if (!(det > 0.0)) throw std::domain_error("map Jacobian is not orientation preserving");
        const Mat2 jinv = ev.jacobian.inverse();
        const bool inner = region == Region::kInner;
        const double alpha = inner ? pb.alpha_i : 1.0;
        stiff += (q.weight * alpha * det * (jinv * jinv.transpose())).cast<Complex>();
        m = det * (inner ? ki2 : ko2);
        if (inner) {
          // -(a - a_background)(u_inc, v), nonzero only inside the scatterer.
          const Complex u_inc = std::exp(kI * pb.kappa_o * dir.dot(ev.x));
          const Eigen::Matrix<Complex, 2, 1> flux =
              (pb.alpha_i - 1.0) * det * (jinv * dir).cast<Complex>() * (kI * pb.kappa_o * u_inc);
          const Complex react = det * (ki2 - ko2) * u_inc;
          for (int k = 0; k < 3; ++k) {
            load[k] += q.weight * (-(e.grad(k, 0) * flux[0] + e.grad(k, 1) * flux[1]) + react * q.lambda[k]);
          }
        }
      }
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) mass(r, c) += q.weight * m * q.lambda[r] * q.lambda[c];
    }
    const Eigen::Matrix<Complex, 3, 2> g = e.grad.cast<Complex>();
    const Mat3c ke = e.area * (g * stiff * g.transpose() - mass);
    load *= e.area;

    const auto& tri = mesh.triangles()[t];
    for (int r = 0; r < 3; ++r) {
      const auto fr = sys.free_index[tri[r]];
      if (fr < 0) continue;
      sys.rhs[fr] += load[r];
      for (int c = 0; c < 3; ++c) {
        const auto fc = sys.free_index[tri[c]];
        if (fc >= 0)
          triplets.push_back({static_cast<std::uint32_t>(fr), static_cast<std::uint32_t>(fc), ke(r, c)});
      }
    }
  }
  sys.matrix = CsrMatrix<Complex>::from_triplets(n_free, n_free, std::move(triplets));
  return sys;
}

ScalarField solve_helmholtz(const HelmholtzProblem& pb, std::span<const double> y) {
  const auto sys = assemble_helmholtz(pb, y);
  std::vector<Complex> us;
  try {
    us = lu_solve(sys.matrix, std::span<const Complex>(sys.rhs));
  } catch (const SolverError& err) {
    throw SolverError(fmt::format("{} at y = [{}]", err.what(), fmt::join(y, ", ")));
  }

  const Mesh& mesh = *pb.mesh;
  ScalarField field;
  field.mesh = pb.mesh;
  field.real.assign(mesh.num_vertices(), 0.0);
  field.imag.assign(mesh.num_vertices(), 0.0);
  field.pml_node.assign(mesh.num_vertices(), 0);
  const double tol = 1e-12 * pb.radius;
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    Complex u = sys.free_index[v] >= 0 ? us[sys.free_index[v]] : Complex(0.0);
    const Vec2& xh = mesh.vertices()[v];
    if (xh.norm() > pb.radius + tol) {
      field.pml_node[v] = 1;
    } else {
      u += incident_wave(pb, pb.map.forward(y, xh));
    }
    field.real[v] = u.real();
    field.imag[v] = u.imag();
  }
  return field;
}

}  // namespace stochif
