#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "stochif/mesh.hpp"

namespace stochif {

namespace {

constexpr char kMeshMagic[8] = {'S', 'T', 'O', 'C', 'H', 'I', 'F', 'M'};
constexpr char kFieldMagic[8] = {'S', 'T', 'O', 'C', 'H', 'I', 'F', 'F'};
constexpr std::uint32_t kMeshVersion = 1;

// Little-endian primitives independent of the host byte order.
template <typename U>
void put_uint(std::ostream& out, U value) {
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <typename U>
U get_uint(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U)))
    throw std::runtime_error("truncated mesh file");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

void put_f64(std::ostream& out, double x) { put_uint(out, std::bit_cast<std::uint64_t>(x)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_uint<std::uint64_t>(in)); }

void expect_magic(std::istream& in, const char (&magic)[8]) {
  char buf[8];
  if (!in.read(buf, 8) || std::memcmp(buf, magic, 8) != 0)
    throw std::runtime_error("bad magic in mesh file");
}

}  // namespace

void write_mesh_binary(const Mesh& mesh, std::ostream& out) {
  out.write(kMeshMagic, 8);
  put_uint<std::uint32_t>(out, kMeshVersion);
  put_uint<std::uint64_t>(out, mesh.num_vertices());
  put_uint<std::uint64_t>(out, mesh.num_triangles());
  put_uint<std::uint64_t>(out, mesh.boundary_nodes().size());
  const auto& s = mesh.sizing();
  for (double x : {s.h_interface, s.h_far, s.grading, s.radial_refine}) put_f64(out, x);
  const auto& c = mesh.circles();
  for (double x : {c.r_inner, c.r0, c.r_outer, c.r_pml}) put_f64(out, x);
  for (const auto& v : mesh.vertices()) {
    put_f64(out, v.x());
    put_f64(out, v.y());
  }
  for (const auto& t : mesh.triangles())
    for (auto i : t) put_uint<std::uint32_t>(out, i);
  for (auto r : mesh.region()) put_uint<std::uint8_t>(out, static_cast<std::uint8_t>(r));
  for (auto b : mesh.band()) put_uint<std::uint8_t>(out, static_cast<std::uint8_t>(b));
  for (auto b : mesh.boundary_nodes()) put_uint<std::uint32_t>(out, b);
}

Mesh read_mesh_binary(std::istream& in) {
  expect_magic(in, kMeshMagic);
  const auto version = get_uint<std::uint32_t>(in);
  if (version != kMeshVersion) throw std::runtime_error(fmt::format("unsupported mesh version {}", version));
  const auto nv = get_uint<std::uint64_t>(in);
  const auto nt = get_uint<std::uint64_t>(in);
  const auto nb = get_uint<std::uint64_t>(in);
  MeshSizing s;
  s.h_interface = get_f64(in);
  s.h_far = get_f64(in);
  s.grading = get_f64(in);
  s.radial_refine = get_f64(in);
  MeshCircles c;
  c.r_inner = get_f64(in);
  c.r0 = get_f64(in);
  c.r_outer = get_f64(in);
  c.r_pml = get_f64(in);

  std::vector<Vec2> vertices(nv);
  for (auto& v : vertices) {
    v.x() = get_f64(in);
    v.y() = get_f64(in);
  }
  std::vector<Triangle> tris(nt);
  for (auto& t : tris)
    for (auto& i : t) i = get_uint<std::uint32_t>(in);
  std::vector<Region> region(nt);
  for (auto& r : region) {
    const auto tag = get_uint<std::uint8_t>(in);
    if (tag > 2) throw std::runtime_error("invalid region tag in mesh file");
    r = static_cast<Region>(tag);
  }
  std::vector<MapBand> band(nt);
  for (auto& b : band) {
    const auto tag = get_uint<std::uint8_t>(in);
    if (tag > 3) throw std::runtime_error("invalid band tag in mesh file");
    b = static_cast<MapBand>(tag);
  }
  std::vector<std::uint32_t> boundary(nb);
  for (auto& b : boundary) b = get_uint<std::uint32_t>(in);
  return Mesh(std::move(vertices), std::move(tris), std::move(region), std::move(band),
              std::move(boundary), c, s);
}

void write_mesh_text(const Mesh& mesh, std::ostream& out) {
  fmt::print(out, "# stochif mesh v{}\n", kMeshVersion);
  fmt::print(out, "vertices {}\n", mesh.num_vertices());
  for (const auto& v : mesh.vertices()) fmt::print(out, "{:.17g} {:.17g}\n", v.x(), v.y());
  fmt::print(out, "triangles {}\n", mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    fmt::print(out, "{} {} {} {} {}\n", tri[0], tri[1], tri[2], static_cast<int>(mesh.region()[t]),
               static_cast<int>(mesh.band()[t]));
  }
  fmt::print(out, "boundary {}\n", mesh.boundary_nodes().size());
  for (auto b : mesh.boundary_nodes()) fmt::print(out, "{}\n", b);
}

void write_field_binary(const Mesh& mesh, const std::vector<std::vector<double>>& components,
                        std::ostream& out) {
  for (const auto& c : components) {
    if (c.size() != mesh.num_vertices())
      throw std::invalid_argument("field component does not match the vertex count");
  }
  write_mesh_binary(mesh, out);
  out.write(kFieldMagic, 8);
  put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(components.size()));
  put_uint<std::uint64_t>(out, mesh.num_vertices());
  for (const auto& c : components)
    for (double x : c) put_f64(out, x);
}

}  // namespace stochif
