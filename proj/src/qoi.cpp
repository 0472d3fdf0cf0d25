#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "stochif/pde.hpp"

namespace stochif {

void write_field_csv(const ScalarField& field, std::ostream& out) {
  const auto& verts = field.mesh->vertices();
  fmt::print(out, field.is_complex() ? "x1,x2,re,im\n" : "x1,x2,value\n");
  for (std::size_t v = 0; v < verts.size(); ++v) {
    if (field.is_complex()) {
      fmt::print(out, "{:.17g},{:.17g},{:.17g},{:.17g}\n", verts[v].x(), verts[v].y(), field.real[v],
                 field.imag[v]);
    } else {
      fmt::print(out, "{:.17g},{:.17g},{:.17g}\n", verts[v].x(), verts[v].y(), field.real[v]);
    }
  }
}

std::vector<double> evaluate_qoi(const ScalarField& field, const DomainMap& map,
                                 std::span<const double> y, std::span<const Vec2> points,
                                 QoiKind kind) {
  const Mesh& mesh = *field.mesh;
  std::vector<double> q;
  q.reserve(points.size());
  for (const auto& x : points) {
    const Vec2 xh = map.inverse(y, x);
    const auto loc = mesh.locate(xh);
    const auto& tri = mesh.triangles()[loc.triangle];
    if (!field.pml_node.empty()) {
      for (auto v : tri) {
        if (field.pml_node[v])
          throw OutsideDomain(fmt::format("point ({}, {}) lies in the absorbing layer", x.x(), x.y()));
      }
    }
    std::complex<double> u = 0.0;
    for (int k = 0; k < 3; ++k) u += loc.lambda[k] * field.value(tri[k]);
    q.push_back(kind == QoiKind::kValue ? u.real() : std::abs(u));
  }
  return q;
}

std::vector<Vec2> circle_points(double radius, int n) {
  if (n < 1) throw std::invalid_argument("need at least one evaluation point");
  std::vector<Vec2> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / n;
    pts.emplace_back(radius * std::cos(phi), radius * std::sin(phi));
  }
  return pts;
}

ScalarQoi elliptic_point_qoi(const EllipticProblem& pb, const Vec2& x0) {
  return [pb, x0](std::span<const double> y) {
    const auto field = solve_elliptic(pb, y);
    return evaluate_qoi(field, pb.map, y, std::span<const Vec2>(&x0, 1), QoiKind::kValue)[0];
  };
}

ScalarQoi helmholtz_point_qoi(const HelmholtzProblem& pb, const Vec2& x0) {
  return [pb, x0](std::span<const double> y) {
    const auto field = solve_helmholtz(pb, y);
    return evaluate_qoi(field, pb.map, y, std::span<const Vec2>(&x0, 1), QoiKind::kAmplitude)[0];
  };
}

KinkProfile probe_kink(const ScalarQoi& qoi, const DomainMap& map, std::span<const double> y_a,
                       std::span<const double> y_b, const Vec2& x0, int n_steps) {
  if (n_steps < 3) throw std::invalid_argument("probe needs at least 3 steps");
  if (y_a.size() != y_b.size()) throw std::invalid_argument("segment end points differ in length");
  const std::size_t d = y_a.size();

  KinkProfile p;
  p.t.resize(n_steps);
  p.q.resize(n_steps);
  std::vector<double> y(d);
  for (int k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) / (n_steps - 1);
    for (std::size_t j = 0; j < d; ++j) y[j] = y_a[j] + t * (y_b[j] - y_a[j]);
    p.t[k] = t;
    p.q[k] = qoi(y);
  }

  const double h = 1.0 / (n_steps - 1);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  p.d1.assign(n_steps, nan);
  p.d2.assign(n_steps, nan);
  for (int k = 1; k + 1 < n_steps; ++k) {
    p.d1[k] = (p.q[k + 1] - p.q[k - 1]) / (2.0 * h);
    p.d2[k] = (p.q[k + 1] - 2.0 * p.q[k] + p.q[k - 1]) / (h * h);
  }

  p.t_cross = nan;
  if (const auto plane = map.kink_hyperplane(x0)) {
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      na += plane->normal[j] * y_a[j];
      nb += plane->normal[j] * y_b[j];
    }
    if (nb != na) {
      const double t = (plane->offset - na) / (nb - na);
      if (t >= 0.0 && t <= 1.0) p.t_cross = t;
    }
  }
  return p;
}

namespace {

// Coefficients (c0, c1, c2) of a least-squares quadratic in (t - s).
Eigen::Vector3d fit_quadratic(const KinkProfile& p, double s, double lo, double hi) {
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < p.t.size(); ++k) {
    if (p.t[k] >= lo && p.t[k] <= hi) idx.push_back(k);
  }
  if (idx.size() < 4)
    throw std::invalid_argument(fmt::format("too few samples in [{:.4f}, {:.4f}] for a one-sided fit", lo, hi));
  Eigen::MatrixXd a(idx.size(), 3);
  Eigen::VectorXd b(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double tau = p.t[idx[i]] - s;
    a.row(i) << 1.0, tau, tau * tau;
    b[i] = p.q[idx[i]];
  }
  return a.colPivHouseholderQr().solve(b);
}

}  // namespace

DerivativeJump derivative_jump(const KinkProfile& profile, double s, double gap, double window) {
  const auto left = fit_quadratic(profile, s, s - window, s - gap);
  const auto right = fit_quadratic(profile, s, s + gap, s + window);
  return {std::abs(right[1] - left[1]), std::abs(2.0 * (right[2] - left[2]))};
}

KinkAnalysis analyze_kink(const KinkProfile& profile, double gap, double window) {
  if (!std::isfinite(profile.t_cross)) throw std::invalid_argument("profile has no kink crossing");
  const double t0 = profile.t.front();
  const double t1 = profile.t.back();
  const double tc = profile.t_cross;
  if (tc - window < t0 || tc + window > t1)
    throw std::invalid_argument("crossing too close to the end of the segment for the fit window");

  KinkAnalysis out;
  out.at_crossing = derivative_jump(profile, tc, gap, window);

  int n_ref = 0;
  const double step = 0.5 * window;
  for (double s = t0 + window; s <= t1 - window + 1e-12; s += step) {
    if (std::abs(s - tc) < window + gap) continue;
    const auto j = derivative_jump(profile, s, gap, window);
    out.baseline.d1 = std::max(out.baseline.d1, j.d1);
    out.baseline.d2 = std::max(out.baseline.d2, j.d2);
    ++n_ref;
  }
  if (n_ref == 0) throw std::invalid_argument("segment too short for off-crossing reference fits");

  out.d1_ratio = out.at_crossing.d1 / out.baseline.d1;
  out.d2_ratio = out.at_crossing.d2 / out.baseline.d2;
  double slope = 0.0;
  for (double v : profile.d1) {
    if (std::isfinite(v)) slope = std::max(slope, std::abs(v));
  }
  out.d1_relative = slope > 0.0 ? out.at_crossing.d1 / slope : 0.0;
  return out;
}

}  // namespace stochif
