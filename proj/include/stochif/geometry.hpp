#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace stochif {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Parameters of the random interface r(y; phi) = r0 + sum_j b_j y_j psi_j(phi)
/// with b_{2j-1} = b_{2j} = c * r0 * j^{-p}.
struct InterfaceParams {
  double r0 = 0.5;
  int d = 8;
  double p = 3.0;
  double c = 0.08;
  /// Enforce sum_j |b_j| <= r0 / 2. When false only radius positivity is
  /// required here; DomainMap additionally checks that the map stays monotone.
  bool strict_amplitude = true;
};

/// Fourier-type basis: sin(((j+1)/2) phi) for odd j, cos((j/2) phi) for even j.
double basis(int j, double phi);
/// d/dphi of basis(j, phi).
double basis_derivative(int j, double phi);

class InterfaceModel {
 public:
  explicit InterfaceModel(const InterfaceParams& params);

  const InterfaceParams& params() const { return params_; }
  double r0() const { return params_.r0; }
  int dimension() const { return params_.d; }
  /// Coefficients b_1..b_d stored zero-based.
  const std::vector<double>& coefficients() const { return b_; }

  double radius(std::span<const double> y, double phi) const;
  double radius_derivative(std::span<const double> y, double phi) const;
  /// sum_j |b_j|, the largest possible deviation of the radius from r0.
  double amplitude_bound() const;
  /// (sqrt(2) / r0) * sum_{j <= d/2} |b_{2j}|, as a fraction (not percent).
  double max_shape_variation() const;

 private:
  InterfaceParams params_;
  std::vector<double> b_;
};

/// Piece of the piecewise-linear mollifier a point belongs to. FEM quadrature
/// passes the band of the containing triangle so that evaluation near the
/// breakpoint circles is one-sided.
enum class MapBand : unsigned char { kCore = 0, kRising = 1, kFalling = 2, kExterior = 3 };

struct MapParams {
  double r_inner = 0.125;
  double r_outer = 0.875;
};

struct MapEval {
  Vec2 x;
  Mat2 jacobian;
};

struct Hyperplane {
  std::vector<double> normal;
  double offset = 0.0;
};

/// Radial domain mapping x = xh + chi(|xh|) (r(y; arg xh) - r0) xh / |xh|.
class DomainMap {
 public:
  DomainMap(InterfaceModel interface, MapParams params);

  const InterfaceModel& interface() const { return interface_; }
  double r_inner() const { return params_.r_inner; }
  double r_outer() const { return params_.r_outer; }
  double r0() const { return interface_.r0(); }

  /// Band containing rho; breakpoints belong to the band above them.
  MapBand band_of(double rho) const;
  double mollifier(double rho) const;
  /// Linear branch of the mollifier for the given band, extended beyond it.
  double mollifier(double rho, MapBand band) const;
  double mollifier_slope(MapBand band) const;

  Vec2 forward(std::span<const double> y, const Vec2& xh) const;
  /// Jacobian of forward. Throws std::domain_error on a breakpoint circle.
  Mat2 jacobian(std::span<const double> y, const Vec2& xh) const;
  /// One-sided Jacobian using the mollifier branch of `band`.
  Mat2 jacobian(std::span<const double> y, const Vec2& xh, MapBand band) const;
  /// forward and the one-sided jacobian in one pass.
  MapEval evaluate(std::span<const double> y, const Vec2& xh, MapBand band) const;
  /// Exact inverse along the ray through x (the map preserves angles and is
  /// piecewise linear in the radial coordinate). Throws std::runtime_error if
  /// the radial profile is not monotone.
  Vec2 inverse(std::span<const double> y, const Vec2& x) const;

  /// Parameters y for which the interface passes through x0, as the affine
  /// set {y : normal . y = offset}, or nullopt if it misses [-1,1]^d.
  std::optional<Hyperplane> kink_hyperplane(const Vec2& x0) const;

 private:
  InterfaceModel interface_;
  MapParams params_;
};

/// Interface and mollifier settings as one configuration block with keys
/// r0, d, p, c, r_inner, r_outer (and optionally strict_amplitude).
struct GeometryConfig {
  InterfaceParams interface;
  MapParams map;

  DomainMap build() const;
};

void to_json(nlohmann::json& j, const GeometryConfig& g);
/// Missing r_inner defaults to r0 / 4.
void from_json(const nlohmann::json& j, GeometryConfig& g);

}  // namespace stochif
