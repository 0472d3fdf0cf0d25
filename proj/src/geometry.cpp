#include "stochif/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stochif {

double basis(int j, double phi) {
  if (j < 1) throw std::invalid_argument("basis index must be >= 1");
  if (j % 2 == 1) return std::sin(0.5 * (j + 1) * phi);
  return std::cos(0.5 * j * phi);
}

double basis_derivative(int j, double phi) {
  if (j < 1) throw std::invalid_argument("basis index must be >= 1");
  if (j % 2 == 1) {
    const double k = 0.5 * (j + 1);
    return k * std::cos(k * phi);
  }
  const double k = 0.5 * j;
  return -k * std::sin(k * phi);
}

InterfaceModel::InterfaceModel(const InterfaceParams& params) : params_(params) {
  if (!(params.r0 > 0.0)) throw std::invalid_argument("r0 must be positive");
  if (params.d < 2 || params.d % 2 != 0)
    throw std::invalid_argument("parameter dimension d must be even and >= 2");
  if (!(params.p >= 1.0)) throw std::invalid_argument("decay p must be >= 1");
  if (!(params.c >= 0.0)) throw std::invalid_argument("amplitude factor c must be >= 0");

  b_.resize(params.d);
  for (int j = 1; j <= params.d / 2; ++j) {
    const double bj = params.c * params.r0 * std::pow(static_cast<double>(j), -params.p);
    b_[2 * j - 2] = bj;
    b_[2 * j - 1] = bj;
  }

  const double amp = amplitude_bound();
  if (params.strict_amplitude && amp > 0.5 * params.r0 * (1.0 + 1e-14)) {
    throw std::invalid_argument("sum |b_j| = " + std::to_string(amp) +
                                " exceeds r0/2; set strict_amplitude=false to allow it");
  }
  if (amp >= params.r0) throw std::invalid_argument("sum |b_j| >= r0: radius may vanish");
}

double InterfaceModel::radius(std::span<const double> y, double phi) const {
  if (static_cast<int>(y.size()) != params_.d)
    throw std::invalid_argument("parameter vector has wrong length");
  double r = params_.r0;
  for (int j = 1; j <= params_.d; ++j) r += b_[j - 1] * y[j - 1] * basis(j, phi);
  return r;
}

double InterfaceModel::radius_derivative(std::span<const double> y, double phi) const {
  if (static_cast<int>(y.size()) != params_.d)
    throw std::invalid_argument("parameter vector has wrong length");
  double dr = 0.0;
  for (int j = 1; j <= params_.d; ++j) dr += b_[j - 1] * y[j - 1] * basis_derivative(j, phi);
  return dr;
}

double InterfaceModel::amplitude_bound() const {
  double s = 0.0;
  for (double bj : b_) s += std::abs(bj);
  return s;
}

double InterfaceModel::max_shape_variation() const {
  double s = 0.0;
  for (int j = 1; j <= params_.d / 2; ++j) s += std::abs(b_[2 * j - 1]);
  return std::sqrt(2.0) / params_.r0 * s;
}

DomainMap::DomainMap(InterfaceModel interface, MapParams params)
    : interface_(std::move(interface)), params_(params) {
  const double r0 = interface_.r0();
  if (!(0.0 < params_.r_inner && params_.r_inner < r0 && r0 < params_.r_outer))
    throw std::invalid_argument("mollifier cutoffs must satisfy 0 < r_inner < r0 < r_outer");
  // Radial profile rho + chi(rho) * delta is monotone iff both slopes stay positive.
  const double amp = interface_.amplitude_bound();
  if (amp >= r0 - params_.r_inner || amp >= params_.r_outer - r0)
    throw std::invalid_argument("interface amplitude too large for the mollifier support");
}

MapBand DomainMap::band_of(double rho) const {
  if (rho < params_.r_inner) return MapBand::kCore;
  if (rho < r0()) return MapBand::kRising;
  if (rho < params_.r_outer) return MapBand::kFalling;
  return MapBand::kExterior;
}

double DomainMap::mollifier(double rho) const { return mollifier(rho, band_of(rho)); }

double DomainMap::mollifier(double rho, MapBand band) const {
  switch (band) {
    case MapBand::kRising:
      return (rho - params_.r_inner) / (r0() - params_.r_inner);
    case MapBand::kFalling:
      return (params_.r_outer - rho) / (params_.r_outer - r0());
    default:
      return 0.0;
  }
}

double DomainMap::mollifier_slope(MapBand band) const {
  switch (band) {
    case MapBand::kRising:
      return 1.0 / (r0() - params_.r_inner);
    case MapBand::kFalling:
      return -1.0 / (params_.r_outer - r0());
    default:
      return 0.0;
  }
}

Vec2 DomainMap::forward(std::span<const double> y, const Vec2& xh) const {
  const double rho = xh.norm();
  const MapBand band = band_of(rho);
  if (band == MapBand::kCore || band == MapBand::kExterior) return xh;
  const double phi = std::atan2(xh.y(), xh.x());
  const double delta = interface_.radius(y, phi) - r0();
  return xh * (1.0 + mollifier(rho, band) * delta / rho);
}

Mat2 DomainMap::jacobian(std::span<const double> y, const Vec2& xh) const {
  const double rho = xh.norm();
  const double tol = 1e-12 * std::max(1.0, rho);
  for (double c : {params_.r_inner, r0(), params_.r_outer}) {
    if (std::abs(rho - c) <= tol)
      throw std::domain_error("Jacobian requested on a mollifier breakpoint circle");
  }
  return jacobian(y, xh, band_of(rho));
}

Mat2 DomainMap::jacobian(std::span<const double> y, const Vec2& xh, MapBand band) const {
  return evaluate(y, xh, band).jacobian;
}

MapEval DomainMap::evaluate(std::span<const double> y, const Vec2& xh, MapBand band) const {
  if (band == MapBand::kCore || band == MapBand::kExterior) return {xh, Mat2::Identity()};
  const double rho = xh.norm();
  const double phi = std::atan2(xh.y(), xh.x());
  const auto& b = interface_.coefficients();
  if (static_cast<int>(y.size()) != interface_.dimension())
    throw std::invalid_argument("parameter vector has wrong length");
  double delta = 0.0;
  double dr = 0.0;
  for (int k = 1; k <= interface_.dimension() / 2; ++k) {
    const double s = std::sin(k * phi);
    const double c = std::cos(k * phi);
    const double ys = b[2 * k - 2] * y[2 * k - 2];
    const double yc = b[2 * k - 1] * y[2 * k - 1];
    delta += ys * s + yc * c;
    dr += k * (ys * c - yc * s);
  }
  const double chi = mollifier(rho, band);

  const double p_rho = 1.0 + mollifier_slope(band) * delta;
  const double p_over_rho = 1.0 + chi * delta / rho;
  const double p_phi_over_rho = chi * dr / rho;

  const Vec2 er = xh / rho;
  const Vec2 ephi(-er.y(), er.x());
  MapEval out;
  out.x = xh * p_over_rho;
  out.jacobian = p_rho * er * er.transpose() + p_phi_over_rho * er * ephi.transpose() +
                 p_over_rho * ephi * ephi.transpose();
  return out;
}

Vec2 DomainMap::inverse(std::span<const double> y, const Vec2& x) const {
  const double rho = x.norm();
  if (rho <= params_.r_inner || rho >= params_.r_outer) return x;

  const double phi = std::atan2(x.y(), x.x());
  const double delta = interface_.radius(y, phi) - r0();
  const double rise = 1.0 + delta / (r0() - params_.r_inner);
  const double fall = 1.0 - delta / (params_.r_outer - r0());
  if (!(rise > 0.0 && fall > 0.0))
    throw std::runtime_error("radial map is not monotone: invalid interface model");

  double rho_hat;
  if (rho < r0() + delta) {
    rho_hat = (rho + params_.r_inner * delta / (r0() - params_.r_inner)) / rise;
  } else {
    rho_hat = (rho - params_.r_outer * delta / (params_.r_outer - r0())) / fall;
  }
  return x * (rho_hat / rho);
}

std::optional<Hyperplane> DomainMap::kink_hyperplane(const Vec2& x0) const {
  const double rho = x0.norm();
  if (!(rho > 0.0)) throw std::invalid_argument("kink hyperplane undefined at the origin");
  const double phi = std::atan2(x0.y(), x0.x());
  const auto& b = interface_.coefficients();

  Hyperplane h;
  h.normal.resize(b.size());
  double reach = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    h.normal[j] = b[j] * basis(static_cast<int>(j) + 1, phi);
    reach += std::abs(h.normal[j]);
  }
  h.offset = rho - r0();
  if (std::abs(h.offset) > reach) return std::nullopt;
  return h;
}

DomainMap GeometryConfig::build() const { return DomainMap(InterfaceModel(interface), map); }

void to_json(nlohmann::json& j, const GeometryConfig& g) {
  j = nlohmann::json{{"r0", g.interface.r0},
                     {"d", g.interface.d},
                     {"p", g.interface.p},
                     {"c", g.interface.c},
                     {"r_inner", g.map.r_inner},
                     {"r_outer", g.map.r_outer},
                     {"strict_amplitude", g.interface.strict_amplitude}};
}

void from_json(const nlohmann::json& j, GeometryConfig& g) {
  g.interface.r0 = j.value("r0", 0.5);
  g.interface.d = j.value("d", 8);
  g.interface.p = j.value("p", 3.0);
  g.interface.c = j.value("c", 0.08);
  g.interface.strict_amplitude = j.value("strict_amplitude", true);
  g.map.r_inner = j.value("r_inner", g.interface.r0 / 4.0);
  g.map.r_outer = j.value("r_outer", 0.875);
}

}  // namespace stochif
