#include "stochif/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include <fmt/format.h>

#include "stochif/detail/hash.hpp"

namespace stochif {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

int round_up(int n, int multiple) { return ((n + multiple - 1) / multiple) * multiple; }

// Concentric rings of equally spaced vertices. Ring 0 is the origin.
struct RingLayout {
  std::vector<double> radius;
  std::vector<int> count;
  std::vector<std::uint32_t> offset;
};

class SizeField {
 public:
  SizeField(const MeshSizing& s, double band_lo, double band_hi)
      : s_(s), lo_(band_lo), hi_(band_hi) {}

  double tangential(double rho) const {
    return std::min(s_.h_far, s_.h_interface + s_.grading * distance(rho));
  }
  double radial(double rho) const {
    return std::min(tangential(rho), s_.h_interface / s_.radial_refine + s_.grading * distance(rho));
  }

 private:
  double distance(double rho) const { return std::max({0.0, lo_ - rho, rho - hi_}); }

  MeshSizing s_;
  double lo_;
  double hi_;
};

// Ring radii in [a, b] (a excluded, b included) following the radial size field.
void append_rings(double a, double b, const SizeField& size, std::vector<double>& radii) {
  constexpr int kSamples = 4000;
  std::vector<double> cumulative(kSamples + 1, 0.0);
  const double step = (b - a) / kSamples;
  for (int i = 0; i < kSamples; ++i)
    cumulative[i + 1] = cumulative[i] + step / size.radial(a + (i + 0.5) * step);
  const double total = cumulative.back();
  const int n = std::max(1, static_cast<int>(std::ceil(total - 1e-9)));
  int cursor = 0;
  for (int k = 1; k < n; ++k) {
    const double target = total * k / n;
    while (cumulative[cursor + 1] < target) ++cursor;
    const double frac = (target - cumulative[cursor]) / (cumulative[cursor + 1] - cumulative[cursor]);
    radii.push_back(a + (cursor + frac) * step);
  }
  radii.push_back(b);
}

RingLayout make_layout(const std::vector<double>& breakpoints, const SizeField& size,
                       int last_multiple) {
  RingLayout layout;
  layout.radius.push_back(0.0);
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    append_rings(breakpoints[i], breakpoints[i + 1], size, layout.radius);

  layout.count.push_back(1);
  for (std::size_t k = 1; k < layout.radius.size(); ++k) {
    const double rho = layout.radius[k];
    int n = static_cast<int>(std::ceil(kTwoPi * rho / size.tangential(rho)));
    n = round_up(std::max(n, 8), k + 1 == layout.radius.size() ? last_multiple : 4);
    layout.count.push_back(n);
  }
  std::uint32_t off = 0;
  for (int c : layout.count) {
    layout.offset.push_back(off);
    off += static_cast<std::uint32_t>(c);
  }
  return layout;
}

// Vertex coordinates on the upper half are computed and mirrored, so the
// vertex set is exactly symmetric under x2 -> -x2.
std::vector<Vec2> ring_vertices(const RingLayout& layout) {
  std::vector<Vec2> v(layout.offset.back() + layout.count.back());
  v[0] = Vec2::Zero();
  for (std::size_t k = 1; k < layout.radius.size(); ++k) {
    const int n = layout.count[k];
    const double rho = layout.radius[k];
    for (int j = 0; j <= n / 2; ++j) {
      Vec2 p;
      if (j == 0) {
        p = Vec2(rho, 0.0);
      } else if (2 * j == n) {
        p = Vec2(-rho, 0.0);
      } else if (4 * j == n) {
        p = Vec2(0.0, rho);
      } else {
        const double theta = kTwoPi * j / n;
        p = Vec2(rho * std::cos(theta), rho * std::sin(theta));
      }
      v[layout.offset[k] + j] = p;
      if (j != 0 && 2 * j != n) v[layout.offset[k] + (n - j)] = Vec2(p.x(), -p.y());
    }
  }
  return v;
}

struct TriangleSink {
  std::vector<Triangle> tris;
  std::vector<Region> region;
  std::vector<MapBand> band;
  const std::vector<Vec2>* vertices = nullptr;

  void add(std::uint32_t a, std::uint32_t b, std::uint32_t c, Region r, MapBand m) {
    const auto& v = *vertices;
    if (cross(v[b] - v[a], v[c] - v[a]) < 0.0) std::swap(b, c);
    tris.push_back({a, b, c});
    region.push_back(r);
    band.push_back(m);
  }
};

// Index of vertex j on ring k, with j taken modulo the ring count.
std::uint32_t ring_index(const RingLayout& layout, std::size_t k, int j) {
  const int n = layout.count[k];
  return layout.offset[k] + static_cast<std::uint32_t>(((j % n) + n) % n);
}

// Triangulates the strip between rings k and k+1 over the upper half by
// advancing along whichever ring has the next smaller angle, then mirrors.
void triangulate_strip(const RingLayout& layout, std::size_t k, Region region, MapBand band,
                       TriangleSink& sink) {
  const int na = layout.count[k];
  const int nb = layout.count[k + 1];
  std::vector<std::array<std::pair<std::size_t, int>, 3>> upper;
  if (na == 1) {
    for (int j = 0; j < nb / 2; ++j) upper.push_back({{{k, 0}, {k + 1, j}, {k + 1, j + 1}}});
  } else {
    int i = 0;
    int j = 0;
    while (i < na / 2 || j < nb / 2) {
      bool advance_outer;
      if (i == na / 2) {
        advance_outer = true;
      } else if (j == nb / 2) {
        advance_outer = false;
      } else {
        // Compare angles (i+1)/na and (j+1)/nb exactly in integers.
        advance_outer = static_cast<long>(j + 1) * na < static_cast<long>(i + 1) * nb;
      }
      if (advance_outer) {
        upper.push_back({{{k, i}, {k + 1, j}, {k + 1, j + 1}}});
        ++j;
      } else {
        upper.push_back({{{k, i}, {k + 1, j}, {k, i + 1}}});
        ++i;
      }
    }
  }
  for (const auto& tri : upper) {
    sink.add(ring_index(layout, tri[0].first, tri[0].second),
             ring_index(layout, tri[1].first, tri[1].second),
             ring_index(layout, tri[2].first, tri[2].second), region, band);
  }
  for (const auto& tri : upper) {
    auto mirror = [&](const std::pair<std::size_t, int>& v) {
      return layout.count[v.first] == 1 ? ring_index(layout, v.first, 0)
                                        : ring_index(layout, v.first, -v.second);
    };
    sink.add(mirror(tri[0]), mirror(tri[1]), mirror(tri[2]), region, band);
  }
}

MapBand band_for_strip(double outer, const MeshCircles& c) {
  const double tol = 1e-12 * std::max(1.0, outer);
  if (outer <= c.r_inner + tol) return MapBand::kCore;
  if (outer <= c.r0 + tol) return MapBand::kRising;
  if (outer <= c.r_outer + tol) return MapBand::kFalling;
  return MapBand::kExterior;
}

void validate_sizing(const MeshSizing& s) {
  if (!(s.h_interface > 0.0 && s.h_far >= s.h_interface))
    throw std::invalid_argument("mesh sizes must satisfy 0 < h_interface <= h_far");
  if (!(s.grading > 0.0)) throw std::invalid_argument("mesh grading must be positive");
  if (!(s.radial_refine >= 1.0)) throw std::invalid_argument("radial_refine must be >= 1");
}

}  // namespace

std::vector<double> MeshCircles::all() const {
  std::vector<double> c{r_inner, r0, r_outer};
  if (r_pml > 0.0) c.push_back(r_pml);
  return c;
}

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles, std::vector<Region> region,
           std::vector<MapBand> band, std::vector<std::uint32_t> boundary_nodes,
           MeshCircles circles, MeshSizing sizing)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      region_(std::move(region)),
      band_(std::move(band)),
      boundary_nodes_(std::move(boundary_nodes)),
      circles_(circles),
      sizing_(sizing) {
  if (region_.size() != triangles_.size() || band_.size() != triangles_.size())
    throw std::invalid_argument("per-triangle tag arrays must match the triangle count");
  for (const auto& t : triangles_) {
    for (auto v : t) {
      if (v >= vertices_.size()) throw std::invalid_argument("triangle references missing vertex");
    }
  }
  is_boundary_.assign(vertices_.size(), false);
  for (auto b : boundary_nodes_) {
    if (b >= vertices_.size()) throw std::invalid_argument("boundary node out of range");
    is_boundary_[b] = true;
  }
  build_locator();
}

double Mesh::signed_area(std::size_t t) const {
  const auto& tri = triangles_[t];
  const Vec2& a = vertices_[tri[0]];
  return 0.5 * cross(vertices_[tri[1]] - a, vertices_[tri[2]] - a);
}

double Mesh::total_area() const {
  double s = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) s += signed_area(t);
  return s;
}

Vec2 Mesh::centroid(std::size_t t) const {
  const auto& tri = triangles_[t];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

void Mesh::build_locator() {
  if (triangles_.empty()) return;
  Vec2 lo = vertices_[0];
  Vec2 hi = vertices_[0];
  for (const auto& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Vec2 extent = hi - lo;
  const double mean_area = std::abs(total_area()) / triangles_.size();
  cell_ = std::max(2.0 * std::sqrt(mean_area), 1e-300);
  nx_ = std::max(1, static_cast<int>(std::ceil(extent.x() / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(extent.y() / cell_)));
  const long max_cells = 4L * static_cast<long>(triangles_.size()) + 16;
  while (static_cast<long>(nx_) * ny_ > max_cells) {
    cell_ *= 1.5;
    nx_ = std::max(1, static_cast<int>(std::ceil(extent.x() / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil(extent.y() / cell_)));
  }
  grid_origin_ = lo;

  const double eps = 1e-12 * std::max(1.0, extent.maxCoeff());
  auto cell_range = [&](std::size_t t, int& i0, int& i1, int& j0, int& j1) {
    Vec2 tlo = vertices_[triangles_[t][0]];
    Vec2 thi = tlo;
    for (int k = 1; k < 3; ++k) {
      tlo = tlo.cwiseMin(vertices_[triangles_[t][k]]);
      thi = thi.cwiseMax(vertices_[triangles_[t][k]]);
    }
    i0 = std::clamp(static_cast<int>(std::floor((tlo.x() - eps - lo.x()) / cell_)), 0, nx_ - 1);
    i1 = std::clamp(static_cast<int>(std::floor((thi.x() + eps - lo.x()) / cell_)), 0, nx_ - 1);
    j0 = std::clamp(static_cast<int>(std::floor((tlo.y() - eps - lo.y()) / cell_)), 0, ny_ - 1);
    j1 = std::clamp(static_cast<int>(std::floor((thi.y() + eps - lo.y()) / cell_)), 0, ny_ - 1);
  };

  cell_start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    int i0, i1, j0, j1;
    cell_range(t, i0, i1, j0, j1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) ++cell_start_[static_cast<std::size_t>(j) * nx_ + i + 1];
  }
  for (std::size_t c = 1; c < cell_start_.size(); ++c) cell_start_[c] += cell_start_[c - 1];
  cell_items_.resize(cell_start_.back());
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    int i0, i1, j0, j1;
    cell_range(t, i0, i1, j0, j1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        cell_items_[fill[static_cast<std::size_t>(j) * nx_ + i]++] = static_cast<std::uint32_t>(t);
  }
}

bool Mesh::barycentric(std::size_t t, const Vec2& x, std::array<double, 3>& lambda) const {
  const auto& tri = triangles_[t];
  const Vec2& a = vertices_[tri[0]];
  const Vec2 e1 = vertices_[tri[1]] - a;
  const Vec2 e2 = vertices_[tri[2]] - a;
  const double area2 = cross(e1, e2);
  const Vec2 r = x - a;
  lambda[1] = cross(r, e2) / area2;
  lambda[2] = cross(e1, r) / area2;
  lambda[0] = 1.0 - lambda[1] - lambda[2];
  constexpr double kSnap = 1e-12;
  return lambda[0] >= -kSnap && lambda[1] >= -kSnap && lambda[2] >= -kSnap;
}

PointLocation Mesh::locate(const Vec2& x) const {
  if (triangles_.empty()) throw OutsideDomain("empty mesh");
  const double fx = (x.x() - grid_origin_.x()) / cell_;
  const double fy = (x.y() - grid_origin_.y()) / cell_;
  const double slack = 1e-9;
  if (!(fx >= -slack && fy >= -slack && fx <= nx_ + slack && fy <= ny_ + slack))
    throw OutsideDomain(fmt::format("point ({}, {}) is outside the mesh", x.x(), x.y()));
  const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 1);
  const std::size_t c = static_cast<std::size_t>(j) * nx_ + i;
  PointLocation loc;
  for (std::uint32_t k = cell_start_[c]; k < cell_start_[c + 1]; ++k) {
    if (barycentric(cell_items_[k], x, loc.lambda)) {
      loc.triangle = cell_items_[k];
      return loc;
    }
  }
  throw OutsideDomain(fmt::format("point ({}, {}) is outside the mesh", x.x(), x.y()));
}

std::uint64_t Mesh::checksum() const {
  detail::Fnv1a h;
  for (const auto& v : vertices_) {
    const double xy[2] = {v.x(), v.y()};
    h.update(xy, sizeof(xy));
  }
  for (const auto& t : triangles_) h.update(t.data(), sizeof(t));
  h.update(region_.data(), region_.size());
  h.update(band_.data(), band_.size());
  return h.digest();
}

Mesh build_square_mesh(double r0, double r_inner, double r_outer, const MeshSizing& sizing) {
  validate_sizing(sizing);
  if (!(0.0 < r_inner && r_inner < r0 && r0 < r_outer && r_outer < 1.0))
    throw std::invalid_argument("square mesh needs 0 < r_inner < r0 < r_outer < 1");

  const MeshCircles circles{r_inner, r0, r_outer, 0.0};
  const SizeField size(sizing, 0.8 * r0, 1.25 * r0);
  RingLayout layout = make_layout({0.0, r_inner, r0, r_outer}, size, 8);
  std::vector<Vec2> vertices = ring_vertices(layout);

  // Fill layers morph the outermost ring onto the square boundary along rays.
  const std::size_t last = layout.radius.size() - 1;
  const int n = layout.count[last];
  const double corner_gap = std::sqrt(2.0) - r_outer;
  const int layers = std::max(1, static_cast<int>(std::ceil(corner_gap / sizing.h_far - 1e-9)));
  const std::uint32_t ring_base = layout.offset[last];
  std::vector<Vec2> square(n);
  for (int j = 0; j <= n / 2; ++j) {
    Vec2 s;
    if (8 * j == n) {
      s = Vec2(1.0, 1.0);
    } else if (8 * j == 3 * n) {
      s = Vec2(-1.0, 1.0);
    } else {
      const Vec2 dir = vertices[ring_base + j] / r_outer;
      if (std::abs(dir.x()) >= std::abs(dir.y())) {
        s = Vec2(dir.x() > 0 ? 1.0 : -1.0, dir.y() / std::abs(dir.x()));
      } else {
        s = Vec2(dir.x() / std::abs(dir.y()), dir.y() > 0 ? 1.0 : -1.0);
      }
      if (4 * j == n) s = Vec2(0.0, 1.0);
    }
    square[j] = s;
    if (j != 0 && 2 * j != n) square[n - j] = Vec2(s.x(), -s.y());
  }
  const std::uint32_t fill_base = static_cast<std::uint32_t>(vertices.size());
  for (int layer = 1; layer <= layers; ++layer) {
    const double s = static_cast<double>(layer) / layers;
    for (int j = 0; j < n; ++j) {
      if (layer == layers) {
        vertices.push_back(square[j]);
      } else {
        vertices.push_back((1.0 - s) * vertices[ring_base + j] + s * square[j]);
      }
    }
  }

  TriangleSink sink;
  sink.vertices = &vertices;
  for (std::size_t k = 0; k < last; ++k) {
    const Region region = layout.radius[k + 1] <= r0 * (1.0 + 1e-12) ? Region::kInner : Region::kOuter;
    triangulate_strip(layout, k, region, band_for_strip(layout.radius[k + 1], circles), sink);
  }

  auto fill_index = [&](int layer, int j) -> std::uint32_t {
    const int jj = ((j % n) + n) % n;
    if (layer == 0) return ring_base + static_cast<std::uint32_t>(jj);
    return fill_base + static_cast<std::uint32_t>((layer - 1) * n + jj);
  };
  std::vector<std::array<std::pair<int, int>, 3>> upper;
  for (int layer = 0; layer < layers; ++layer) {
    for (int j = 0; j < n / 2; ++j) {
      const Vec2& a = vertices[fill_index(layer, j)];
      const Vec2& b = vertices[fill_index(layer, j + 1)];
      const Vec2& c = vertices[fill_index(layer + 1, j + 1)];
      const Vec2& d = vertices[fill_index(layer + 1, j)];
      // Pick the diagonal whose smaller triangle is larger.
      const double diag_ac = std::min(cross(b - a, c - a), cross(c - a, d - a));
      const double diag_bd = std::min(cross(b - a, d - a), cross(c - b, d - b));
      if (diag_ac >= diag_bd) {
        upper.push_back({{{layer, j}, {layer, j + 1}, {layer + 1, j + 1}}});
        upper.push_back({{{layer, j}, {layer + 1, j + 1}, {layer + 1, j}}});
      } else {
        upper.push_back({{{layer, j}, {layer, j + 1}, {layer + 1, j}}});
        upper.push_back({{{layer, j + 1}, {layer + 1, j + 1}, {layer + 1, j}}});
      }
    }
  }
  for (const auto& t : upper) {
    sink.add(fill_index(t[0].first, t[0].second), fill_index(t[1].first, t[1].second),
             fill_index(t[2].first, t[2].second), Region::kOuter, MapBand::kExterior);
  }
  for (const auto& t : upper) {
    sink.add(fill_index(t[0].first, -t[0].second), fill_index(t[1].first, -t[1].second),
             fill_index(t[2].first, -t[2].second), Region::kOuter, MapBand::kExterior);
  }

  std::vector<std::uint32_t> boundary;
  for (int j = 0; j < n; ++j) boundary.push_back(fill_index(layers, j));
  return Mesh(std::move(vertices), std::move(sink.tris), std::move(sink.region),
              std::move(sink.band), std::move(boundary), circles, sizing);
}

Mesh build_disk_mesh(double r0, double r_inner, double radius, double pml_thickness,
                     const MeshSizing& sizing) {
  validate_sizing(sizing);
  if (!(0.0 < r_inner && r_inner < r0 && r0 < radius))
    throw std::invalid_argument("disk mesh needs 0 < r_inner < r0 < radius");
  if (!(pml_thickness >= 0.0)) throw std::invalid_argument("PML thickness must be >= 0");

  const double outer = radius + pml_thickness;
  const MeshCircles circles{r_inner, r0, radius, pml_thickness > 0.0 ? outer : 0.0};
  std::vector<double> breakpoints{0.0, r_inner, r0, radius};
  if (pml_thickness > 0.0) breakpoints.push_back(outer);
  const SizeField size(sizing, 0.8 * r0, 1.25 * r0);
  RingLayout layout = make_layout(breakpoints, size, 4);
  std::vector<Vec2> vertices = ring_vertices(layout);

  TriangleSink sink;
  sink.vertices = &vertices;
  const std::size_t last = layout.radius.size() - 1;
  for (std::size_t k = 0; k < last; ++k) {
    Region region = Region::kOuter;
    if (layout.radius[k + 1] <= r0 * (1.0 + 1e-12)) {
      region = Region::kInner;
    } else if (pml_thickness > 0.0 && layout.radius[k] >= radius * (1.0 - 1e-12)) {
      region = Region::kPml;
    }
    triangulate_strip(layout, k, region, band_for_strip(layout.radius[k + 1], circles), sink);
  }

  std::vector<std::uint32_t> boundary;
  for (int j = 0; j < layout.count[last]; ++j) boundary.push_back(layout.offset[last] + j);
  return Mesh(std::move(vertices), std::move(sink.tris), std::move(sink.region),
              std::move(sink.band), std::move(boundary), circles, sizing);
}

MeshReport check_mesh(const Mesh& mesh) {
  MeshReport report;
  auto fail = [&](std::string msg) {
    report.ok = false;
    if (report.problems.size() < 20) report.problems.push_back(std::move(msg));
  };

  const auto& v = mesh.vertices();
  const auto& tris = mesh.triangles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    if (!(mesh.signed_area(t) > 0.0)) fail(fmt::format("triangle {} has non-positive area", t));
  }

  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
  for (const auto& t : tris) {
    for (int e = 0; e < 3; ++e) {
      auto a = t[e];
      auto b = t[(e + 1) % 3];
      ++edges[{std::min(a, b), std::max(a, b)}];
    }
  }
  const auto& on_boundary = mesh.is_boundary();
  for (const auto& [edge, uses] : edges) {
    if (uses > 2) fail(fmt::format("edge ({}, {}) shared by {} triangles", edge.first, edge.second, uses));
    if (uses == 1 && !(on_boundary[edge.first] && on_boundary[edge.second]))
      fail(fmt::format("edge ({}, {}) is open but not on the outer boundary", edge.first, edge.second));
  }

  const auto circles = mesh.circles().all();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double rho = v[i].norm();
    for (double c : circles) {
      const double diff = std::abs(rho - c);
      if (diff > 1e-12 * std::max(1.0, c) && diff < 1e-9 * c)
        fail(fmt::format("vertex {} is near but not on circle {}", i, c));
    }
  }
  const MeshCircles& mc = mesh.circles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    double lo = v[tris[t][0]].norm();
    double hi = lo;
    for (int k = 1; k < 3; ++k) {
      lo = std::min(lo, v[tris[t][k]].norm());
      hi = std::max(hi, v[tris[t][k]].norm());
    }
    for (double c : circles) {
      const double tol = 1e-12 * std::max(1.0, c);
      if (lo < c - tol && hi > c + tol) fail(fmt::format("triangle {} straddles circle {}", t, c));
    }
    const double tol = 1e-12;
    const Region expect = hi <= mc.r0 + tol ? Region::kInner
                          : (mc.r_pml > 0.0 && lo >= mc.r_outer - tol) ? Region::kPml
                                                                       : Region::kOuter;
    if (mesh.region()[t] != expect) fail(fmt::format("triangle {} has inconsistent region tag", t));
  }
  return report;
}

}  // namespace stochif
