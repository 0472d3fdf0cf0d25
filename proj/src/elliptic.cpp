#include <cmath>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "stochif/fem.hpp"
#include "stochif/pde.hpp"

namespace stochif {

double default_source(const Vec2& x) {
  return 20.0 + 10.0 * std::sin(x.x()) - 5.0 * std::exp(x.x() * x.y());
}

TransformedCoefficients transformed_coefficients(const DomainMap& map, std::span<const double> y,
                                                 const Vec2& xh, MapBand band, double alpha) {
  const Mat2 j = map.jacobian(y, xh, band);
  const double det = j.determinant();
  if (!(det > 0.0)) throw std::domain_error("map Jacobian is not orientation preserving");
  const Mat2 jinv = j.inverse();
  return {alpha * det * jinv * jinv.transpose(), det};
}

EllipticProblem::EllipticProblem(std::shared_ptr<const Mesh> mesh_, DomainMap map_, double alpha_i_)
    : mesh(std::move(mesh_)), map(std::move(map_)), alpha_i(alpha_i_) {
  if (!mesh) throw std::invalid_argument("elliptic problem needs a mesh");
  if (!(alpha_i > 0.0)) throw std::invalid_argument("alpha_i must be positive");
}

EllipticSystem assemble_elliptic(const EllipticProblem& pb, std::span<const double> y) {
  const Mesh& mesh = *pb.mesh;
  const std::size_t nv = mesh.num_vertices();

  EllipticSystem sys;
  sys.free_index.assign(nv, -1);
  std::int64_t n_free = 0;
  for (std::size_t v = 0; v < nv; ++v) {
    if (!mesh.is_boundary()[v]) sys.free_index[v] = n_free++;
  }
  sys.boundary_values.assign(nv, 0.0);
  if (pb.dirichlet) {
    for (auto v : mesh.boundary_nodes())
      sys.boundary_values[v] = pb.dirichlet(pb.map.forward(y, mesh.vertices()[v]));
  }

  std::vector<Triplet<double>> triplets;
  triplets.reserve(9 * mesh.num_triangles());
  sys.rhs.assign(static_cast<std::size_t>(n_free), 0.0);

  const auto rule = fem::quadrature_order2();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto e = fem::element(mesh, t);
    const double alpha = mesh.region()[t] == Region::kInner ? pb.alpha_i : pb.alpha_o;
    const MapBand band = mesh.band()[t];

    Mat2 a_avg = Mat2::Zero();
    Eigen::Vector3d load = Eigen::Vector3d::Zero();
    for (const auto& q : rule) {
      const Vec2 xh = e.point(q.lambda);
      const auto m = pb.map.evaluate(y, xh, band);
      const double det = m.jacobian.determinant();
      if (!(det > 0.0)) throw std::domain_error("map Jacobian is not orientation preserving");
      const Mat2 jinv = m.jacobian.inverse();
      a_avg += q.weight * (alpha * det) * (jinv * jinv.transpose());
      const double fq = pb.source(m.x) * det;
      for (int k = 0; k < 3; ++k) load[k] += q.weight * fq * q.lambda[k];
    }
    const Eigen::Matrix3d ke = e.area * e.grad * a_avg * e.grad.transpose();
    load *= e.area;

    const auto& tri = mesh.triangles()[t];
    for (int r = 0; r < 3; ++r) {
      const auto fr = sys.free_index[tri[r]];
      if (fr < 0) continue;
      sys.rhs[fr] += load[r];
      for (int c = 0; c < 3; ++c) {
        const auto fc = sys.free_index[tri[c]];
        if (fc < 0) {
          sys.rhs[fr] -= ke(r, c) * sys.boundary_values[tri[c]];
        } else {
          triplets.push_back({static_cast<std::uint32_t>(fr), static_cast<std::uint32_t>(fc), ke(r, c)});
        }
      }
    }
  }
  sys.matrix = CsrMatrix<double>::from_triplets(n_free, n_free, std::move(triplets));
  return sys;
}

ScalarField solve_elliptic(const EllipticProblem& pb, std::span<const double> y, SolveStats* stats) {
  const auto sys = assemble_elliptic(pb, y);
  CgResult cg;
  try {
    cg = cg_solve(sys.matrix, sys.rhs, pb.solver);
  } catch (const SolverError& err) {
    throw SolverError(fmt::format("{} at y = [{}]", err.what(), fmt::join(y, ", ")));
  }
  if (stats) {
    stats->iterations = cg.iterations;
    stats->relative_residual = cg.relative_residual;
  }

  ScalarField field;
  field.mesh = pb.mesh;
  field.real = sys.boundary_values;
  for (std::size_t v = 0; v < field.real.size(); ++v) {
    if (sys.free_index[v] >= 0) field.real[v] = cg.x[sys.free_index[v]];
  }
  return field;
}

}  // namespace stochif
