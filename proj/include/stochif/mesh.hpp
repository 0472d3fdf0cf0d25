#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochif/geometry.hpp"

namespace stochif {

/// Material region of a triangle on the nominal configuration.
enum class Region : std::uint8_t { kInner = 0, kOuter = 1, kPml = 2 };

using Triangle = std::array<std::uint32_t, 3>;

struct PointLocation {
  std::size_t triangle = 0;
  std::array<double, 3> lambda{};
};

class OutsideDomain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Circles resolved exactly by the mesh: mollifier breakpoints and, for the
/// Helmholtz disk, the outer PML radius (0 when absent).
struct MeshCircles {
  double r_inner = 0.0;
  double r0 = 0.0;
  double r_outer = 0.0;
  double r_pml = 0.0;

  std::vector<double> all() const;
};

struct MeshSizing {
  double h_interface = 0.01;
  double h_far = 0.06;
  /// Growth of the target edge length per unit distance from the interface band.
  double grading = 0.3;
  /// Ring spacing inside the interface band is h_interface / radial_refine.
  double radial_refine = 1.0;
};

/// Triangulation of the nominal configuration. Immutable once built; point
/// location uses a bucket grid set up by the constructor.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Vec2> vertices, std::vector<Triangle> triangles, std::vector<Region> region,
       std::vector<MapBand> band, std::vector<std::uint32_t> boundary_nodes,
       MeshCircles circles, MeshSizing sizing);

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Region>& region() const { return region_; }
  const std::vector<MapBand>& band() const { return band_; }
  const std::vector<std::uint32_t>& boundary_nodes() const { return boundary_nodes_; }
  const MeshCircles& circles() const { return circles_; }
  const MeshSizing& sizing() const { return sizing_; }
  const std::vector<bool>& is_boundary() const { return is_boundary_; }

  double signed_area(std::size_t t) const;
  double total_area() const;
  Vec2 centroid(std::size_t t) const;

  /// Containing triangle with barycentric coordinates; among several
  /// candidates the lowest triangle index wins. Throws OutsideDomain.
  PointLocation locate(const Vec2& x) const;

  /// FNV-1a checksum of geometry, connectivity and tags.
  std::uint64_t checksum() const;

 private:
  void build_locator();
  bool barycentric(std::size_t t, const Vec2& x, std::array<double, 3>& lambda) const;

  std::vector<Vec2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Region> region_;
  std::vector<MapBand> band_;
  std::vector<std::uint32_t> boundary_nodes_;
  std::vector<bool> is_boundary_;
  MeshCircles circles_;
  MeshSizing sizing_;

  Vec2 grid_origin_ = Vec2::Zero();
  double cell_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> cell_items_;
};

/// Square (-1,1)^2 with a graded polar core resolving r_inner, r0 and r_outer.
Mesh build_square_mesh(double r0, double r_inner, double r_outer, const MeshSizing& sizing);

/// Disk of radius radius + pml_thickness with rings on r_inner, r0, radius and
/// the outer PML circle. pml_thickness == 0 gives a plain disk.
Mesh build_disk_mesh(double r0, double r_inner, double radius, double pml_thickness,
                     const MeshSizing& sizing);

struct MeshReport {
  bool ok = true;
  std::vector<std::string> problems;
};

/// Machine check of positivity, conformity and circle conformity.
MeshReport check_mesh(const Mesh& mesh);

// Serialization.
void write_mesh_binary(const Mesh& mesh, std::ostream& out);
Mesh read_mesh_binary(std::istream& in);
void write_mesh_text(const Mesh& mesh, std::ostream& out);

/// Mesh followed by a field block of `components` values per vertex.
void write_field_binary(const Mesh& mesh, const std::vector<std::vector<double>>& components,
                        std::ostream& out);

}  // namespace stochif
