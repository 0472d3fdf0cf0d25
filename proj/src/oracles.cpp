#include "stochif/oracles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>


namespace stochif {

namespace {

using Complex = std::complex<double>;

double bessel_j(int n, double x) { return std::cyl_bessel_j(static_cast<double>(n), x); }
double bessel_y(int n, double x) { return std::cyl_neumann(static_cast<double>(n), x); }
Complex hankel1(int n, double x) { return {bessel_j(n, x), bessel_y(n, x)}; }

// d/dx Z_n(x) = (Z_{n-1}(x) - Z_{n+1}(x)) / 2, with Z_{-1} = -Z_1.
double bessel_j_prime(int n, double x) {
  if (n == 0) return -bessel_j(1, x);
  return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x));
}
Complex hankel1_prime(int n, double x) {
  if (n == 0) return -hankel1(1, x);
  return 0.5 * (hankel1(n - 1, x) - hankel1(n + 1, x));
}

}  // namespace

double RadialOracle::value(double rho) const {
  if (rho < 0.0 || rho > radius * (1.0 + 1e-12)) throw std::domain_error("radial oracle evaluated off the disk");
  if (rho >= r0) return boundary_value + (radius * radius - rho * rho) / (4.0 * alpha_o);
  const double at_r0 = boundary_value + (radius * radius - r0 * r0) / (4.0 * alpha_o);
  return at_r0 + (r0 * r0 - rho * rho) / (4.0 * alpha_i);
}

std::pair<Complex, Complex> MieScatterer::coefficients(int n) const {
  const double k = kappa_i / std::sqrt(alpha_i);
  const double a = k * r0;
  const double b = kappa_o * r0;
  // c J_n(a) - s H_n(b) = J_n(b); alpha_i k c J_n'(a) - kappa_o s H_n'(b) = kappa_o J_n'(b).
  // Eliminating s leaves the Wronskian J_n H_n' - J_n' H_n = 2i / (pi b) in the numerator.
  const Complex h = hankel1(n, b);
  const Complex det = kappa_o * bessel_j(n, a) * hankel1_prime(n, b) - alpha_i * k * bessel_j_prime(n, a) * h;
  const Complex c = kappa_o * Complex(0.0, 2.0 / (std::numbers::pi * b)) / det;
  const Complex s = (c * bessel_j(n, a) - bessel_j(n, b)) / h;
  return {c, s};
}

Complex MieScatterer::total_field(const Vec2& x, double tail) const {
  const double rho = x.norm();
  const double phi = std::atan2(x.y(), x.x()) - std::atan2(direction.y(), direction.x());
  const double k = kappa_i / std::sqrt(alpha_i);
  const Complex i(0.0, 1.0);

  Complex sum = 0.0;
  Complex in = 1.0;
  int small = 0;
  const int n_max = static_cast<int>(std::max(k, kappa_o) * std::max(rho, r0)) + 200;
  for (int n = 0; n <= n_max; ++n) {
    const auto [c, s] = coefficients(n);
    Complex mode;
    if (rho < r0) {
      mode = c * bessel_j(n, k * rho);
    } else {
      mode = bessel_j(n, kappa_o * rho) + s * hankel1(n, kappa_o * rho);
    }
    const Complex term = (n == 0 ? 1.0 : 2.0) * in * mode * std::cos(n * phi);
    sum += term;
    in *= i;
    // Three consecutive negligible terms.
    small = std::abs(term) <= tail * std::abs(sum) ? small + 1 : 0;
    if (small >= 3) return sum;
  }
  throw std::runtime_error("Mie series did not converge");
}

}  // namespace stochif
