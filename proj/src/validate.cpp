#include "stochif/validate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "stochif/random.hpp"
#include "stochif/verification.hpp"

namespace stochif {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDecays[3] = {1.0, 2.0, 3.0};
constexpr int kDims[4] = {8, 16, 32, 64};

DomainMap table_map(double p, int d) {
  InterfaceParams ip{0.5, d, p, 0.08, false};
  ip.strict_amplitude = InterfaceModel(ip).amplitude_bound() <= 0.25;
  return DomainMap(InterfaceModel(ip), MapParams{0.125, 0.875});
}

double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

struct GeometryStats {
  double min_det = INFINITY;
  double roundtrip = 0.0;
  double jacobian = 0.0;
  double affinity = 0.0;
};

// Root of t -> radius(y_a + t (y_b - y_a), phi) - target by bisection.
double crossing(const InterfaceModel& m, const std::vector<double>& ya, const std::vector<double>& yb, double phi,
                double target) {
  std::vector<double> y(ya.size());
  auto g = [&](double t) {
    for (std::size_t j = 0; j < y.size(); ++j) y[j] = ya[j] + t * (yb[j] - ya[j]);
    return m.radius(y, phi) - target;
  };
  double lo = -1.0, hi = 2.0;
  while (g(lo) * g(hi) > 0.0) {
    lo *= 2.0;
    hi *= 2.0;
    if (hi > 1e12) throw std::runtime_error("no crossing on the line");
  }
  double glo = g(lo);
  for (int it = 0; it < 400 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double gm = g(mid);
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

GeometryStats geometry_cell(const DomainMap& map, int samples, std::uint64_t seed, std::uint64_t stream) {
  const auto& m = map.interface();
  const int d = m.dimension();
  const CounterRng rng(seed, stream);
  GeometryStats s;
  std::vector<double> y(d);
  const double breaks[3] = {map.r_inner(), map.r0(), map.r_outer()};
  for (int n = 0; n < samples; ++n) {
    const auto idx = static_cast<std::uint64_t>(n);
    for (int j = 0; j < d; ++j) y[j] = rng.uniform(idx, j, -1.0, 1.0);
    const double rho = rng.uniform(idx, d, 0.02, 0.98);
    const double phi = rng.uniform(idx, d + 1, 0.0, kTwoPi);
    const Vec2 xh(rho * std::cos(phi), rho * std::sin(phi));

    const Mat2 jac = map.jacobian(y, xh, map.band_of(rho));
    s.min_det = std::min(s.min_det, jac.determinant());

    const Vec2 x = map.forward(y, xh);
    s.roundtrip = std::max(s.roundtrip, (map.inverse(y, x) - xh).cwiseAbs().maxCoeff());
    const double rho2 = rng.uniform(idx, d + 2, 0.02, 0.98);
    const Vec2 xp(rho2 * std::cos(phi), rho2 * std::sin(phi));
    s.roundtrip = std::max(s.roundtrip, (map.forward(y, map.inverse(y, xp)) - xp).cwiseAbs().maxCoeff());

    const bool near_break = std::any_of(std::begin(breaks), std::end(breaks),
                                        [&](double b) { return std::abs(rho - b) < 1e-4; });
    if (!near_break) {
      constexpr double h = 1e-6;
      Mat2 fd;
      for (int k = 0; k < 2; ++k) {
        Vec2 e = Vec2::Zero();
        e[k] = h;
        fd.col(k) = (map.forward(y, xh + e) - map.forward(y, xh - e)) / (2.0 * h);
      }
      s.jacobian = std::max(s.jacobian, max_abs(jac - fd) / max_abs(jac));
    }
  }

  for (int n = 0; n < 100; ++n) {
    const auto idx = static_cast<std::uint64_t>(samples + n);
    const double phi0 = rng.uniform(idx, 0, 0.0, kTwoPi);
    double reach = 0.0;
    for (int j = 1; j <= d; ++j) reach += std::abs(m.coefficients()[j - 1] * basis(j, phi0));
    const double target = m.r0() + 0.25 * reach;
    const Vec2 x0(target * std::cos(phi0), target * std::sin(phi0));
    const auto plane = map.kink_hyperplane(x0);
    if (!plane) throw std::runtime_error("kink hyperplane unexpectedly empty");
    std::vector<double> ya(d), yb(d);
    for (int j = 0; j < d; ++j) {
      ya[j] = rng.uniform(idx, 1 + j, -1.0, 1.0);
      yb[j] = rng.uniform(idx, 1 + d + j, -1.0, 1.0);
    }
    const double t = crossing(m, ya, yb, phi0, target);
    double lhs = 0.0;
    for (int j = 0; j < d; ++j) lhs += plane->normal[j] * (ya[j] + t * (yb[j] - ya[j]));
    s.affinity = std::max(s.affinity, std::abs(lhs - plane->offset));
  }
  return s;
}

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, const CounterRng& rng, double lo, double hi) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r)
      m(r, c) = rng.uniform(static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(r), lo, hi);
  return m;
}

double gradcheck(const std::vector<int>& widths, std::uint64_t seed) {
  const Mlp base = Mlp::init(widths, 0.2, seed);
  const CounterRng rng(seed, 99);
  Batch b;
  b.y = uniform_matrix(widths.front(), 7, rng, -1.0, 1.0);
  b.q = uniform_matrix(widths.back(), 7, CounterRng(seed, 98), 0.5, 2.0);
  const Gradients g = backward(base, b);
  constexpr double h = 1e-6;
  double worst = 0.0;
  auto compare = [&](double analytic, double fd) {
    worst = std::max(worst, std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-6}));
  };
  for (int l = 0; l < base.depth(); ++l) {
    for (Eigen::Index i = 0; i < base.weights()[l].size(); ++i) {
      Mlp plus = base, minus = base;
      plus.weights()[l].data()[i] += h;
      minus.weights()[l].data()[i] -= h;
      compare(g.a[l].data()[i], (loss(plus, b) - loss(minus, b)) / (2.0 * h));
    }
    for (Eigen::Index i = 0; i < base.biases()[l].size(); ++i) {
      Mlp plus = base, minus = base;
      plus.biases()[l][i] += h;
      minus.biases()[l][i] -= h;
      compare(g.b[l][i], (loss(plus, b) - loss(minus, b)) / (2.0 * h));
    }
  }
  return worst;
}

struct TargetData {
  Batch train;
  Batch test;
};

TargetData affine_target() {
  Eigen::MatrixXd m(3, 4);
  m << 0.5, -0.3, 0.2, 0.1, -0.4, 0.6, 0.0, 0.3, 0.2, 0.2, -0.5, 0.4;
  const Eigen::Vector3d c(1.0, -1.5, 2.0);
  auto make = [&](int n, std::uint64_t stream) {
    Batch b;
    b.y = uniform_matrix(4, n, CounterRng(3, stream), -1.0, 1.0);
    b.q = (m * b.y).colwise() + c;
    return b;
  };
  return {make(512, 0), make(256, 1)};
}

// Shifted by one so that no target vanishes.
TargetData relu_target() {
  auto make = [&](int n, std::uint64_t stream) {
    Batch b;
    b.y = uniform_matrix(4, n, CounterRng(3, stream), -1.0, 1.0);
    b.q = (1.0 + b.y.row(0).array().max(0.0)).matrix();
    return b;
  };
  return {make(512, 0), make(256, 1)};
}

}  // namespace

const double kReferenceShapeVariation[3][4] = {
    {23.55, 30.75, 38.25, 45.92},
    {16.11, 17.28, 17.93, 18.26},
    {13.32, 13.52, 13.58, 13.60},
};

Check make_check(std::string suite, std::string name, double value, std::string op, double bound, std::string detail) {
  Check c{std::move(suite), std::move(name), value, std::move(op), bound, false, std::move(detail)};
  if (c.op == "<=") c.passed = value <= bound;
  else if (c.op == "<") c.passed = value < bound;
  else if (c.op == ">=") c.passed = value >= bound;
  else if (c.op == ">") c.passed = value > bound;
  else throw std::invalid_argument("unknown comparison " + c.op);
  return c;
}

std::string format_check(const Check& c) {
  return fmt::format("{} {}/{}: {:.6g} {} {:.6g}{}", c.passed ? "PASS" : "FAIL", c.suite, c.name, c.value, c.op,
                     c.bound, c.detail.empty() ? "" : "  (" + c.detail + ")");
}

bool all_passed(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::vector<Check> shape_variation_checks() {
  double worst = 0.0;
  std::string where;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      const double v = 100.0 * table_map(kDecays[r], kDims[c]).interface().max_shape_variation();
      const double dev = std::abs(v - kReferenceShapeVariation[r][c]);
      if (dev >= worst) {
        worst = dev;
        where = fmt::format("worst at p={:g}, d={}: {:.4f}% vs {:.2f}%", kDecays[r], kDims[c], v,
                            kReferenceShapeVariation[r][c]);
      }
    }
  }
  return {make_check("geometry", "shape_variation_pp", worst, "<=", 0.03, where)};
}

std::vector<Check> geometry_checks(int samples, std::uint64_t seed) {
  GeometryStats all;
  std::uint64_t stream = 0;
  for (const double p : kDecays) {
    for (const int d : kDims) {
      const auto s = geometry_cell(table_map(p, d), samples, seed, stream++);
      all.min_det = std::min(all.min_det, s.min_det);
      all.roundtrip = std::max(all.roundtrip, s.roundtrip);
      all.jacobian = std::max(all.jacobian, s.jacobian);
      all.affinity = std::max(all.affinity, s.affinity);
    }
  }
  const auto n = fmt::format("{} samples x 12 cells", samples);
  return {make_check("geometry", "min_jacobian_det", all.min_det, ">", 0.0, n),
          make_check("geometry", "inverse_roundtrip", all.roundtrip, "<=", 1e-10, "max norm, both directions"),
          make_check("geometry", "jacobian_vs_central_differences", all.jacobian, "<=", 1e-6, "relative, step 1e-6"),
          make_check("geometry", "kink_affinity_residual", all.affinity, "<=", 1e-12, "100 segments per cell")};
}

std::vector<Check> fem_checks() {
  std::vector<Check> out;
  const auto study = manufactured_convergence(0.05, 3);
  const auto [lo, hi] = std::minmax_element(study.order.begin(), study.order.end());
  const auto orders = fmt::format("orders {:.3f}, {:.3f}, {:.3f}; fitted {:.3f}", study.order[0], study.order[1],
                                  study.order[2], study.fitted_order);
  out.push_back(make_check("fem", "manufactured_order_min", *lo, ">=", 1.85, orders));
  out.push_back(make_check("fem", "manufactured_order_max", *hi, "<=", 2.15, orders));
  const MeshSizing fine{0.01, 0.01, 0.3, 1.0};
  for (const double alpha : {10.0, 100.0, 0.1})
    out.push_back(make_check("fem", fmt::format("radial_oracle_alpha{:g}", alpha), radial_oracle_error(alpha, fine),
                             "<=", 1e-3, "relative L2, h = 0.01"));
  return out;
}

std::vector<Check> mie_checks() {
  std::vector<Check> out;
  const auto setup = HelmholtzSetup::reference();
  for (const auto& c : mie_study(setup, {{10.0, 0.8}, {100.0, 0.8}, {1.0, 0.08}}))
    out.push_back(make_check("mie", fmt::format("amplitude_alpha{:g}_ratio{:g}", c.alpha_i, c.ratio),
                             c.relative_error, "<=", 0.02, fmt::format("fem {:.6f}, series {:.6f}", c.fem, c.exact)));
  out.push_back(make_check("mie", "transparent_scatterer", transparent_scatterer_ratio(setup, 5), "<=", 1e-3,
                           "max |u_s| / max |u_inc|"));
  return out;
}

std::vector<Check> kink_checks() {
  std::vector<Check> out;
  const MeshSizing elliptic{0.01, 0.06, 0.3, 1.0};
  KinkProbeSettings s;
  const auto e = elliptic_kink_study(100.0, elliptic, s).analysis;
  out.push_back(make_check("kink", "elliptic_d1_ratio", e.d1_ratio, ">=", 5.0,
                           fmt::format("d1 jump {:.4g}, relative {:.3f}", e.at_crossing.d1, e.d1_relative)));
  for (const double offset : {0.12, -0.10}) {
    s.offset = offset;
    const auto ctl = elliptic_kink_study(100.0, elliptic, s).analysis;
    out.push_back(make_check("kink", fmt::format("elliptic_control{:+g}_d1_ratio", offset), ctl.d1_ratio, "<", 5.0));
  }

  auto setup = HelmholtzSetup::reference();
  setup.sizing = MeshSizing{0.0004, 0.0025, 0.3, 4.0};
  s = KinkProbeSettings{};
  const auto h = helmholtz_kink_study(setup, 1.0, 0.8, s).analysis;
  out.push_back(make_check("kink", "helmholtz_d1_relative", h.d1_relative, "<=", 0.05, "first derivative continuous"));
  out.push_back(make_check("kink", "helmholtz_d2_ratio", h.d2_ratio, ">=", 5.0,
                           fmt::format("d2 jump {:.4g}", h.at_crossing.d2)));
  for (const double offset : {0.15, -0.11}) {
    s.offset = offset;
    const auto ctl = helmholtz_kink_study(setup, 1.0, 0.8, s).analysis;
    out.push_back(make_check("kink", fmt::format("helmholtz_control{:+g}_d2_ratio", offset), ctl.d2_ratio, "<", 5.0));
  }
  return out;
}

std::vector<Check> gradcheck_checks(std::uint64_t seed) {
  double worst = 0.0;
  const std::vector<std::vector<int>> nets{{3, 4, 2}, {3, 4, 2}, {4, 6, 5, 3}, {2, 5, 5, 5, 1}};
  for (std::size_t k = 0; k < nets.size(); ++k) worst = std::max(worst, gradcheck(nets[k], seed + k));
  return {make_check("gradcheck", "max_relative_error", worst, "<=", 1e-5,
                     fmt::format("{} random networks, step 1e-6", nets.size()))};
}

std::vector<Check> training_checks() {
  std::vector<Check> out;
  const auto affine = affine_target();

  TrainOptions det;
  det.widths = default_widths(4, 3, 3, 6);
  det.epochs = 200;
  det.restarts = 2;
  det.seed = 4;
  const auto r1 = train(affine.train, affine.test, det);
  det.workers = 2;
  const auto r2 = train(affine.train, affine.test, det);
  bool same = r1.best == r2.best;
  for (std::size_t k = 0; k < r1.reports.size(); ++k)
    same = same && r1.reports[k].loss_history == r2.reports[k].loss_history;
  out.push_back(make_check("training", "restart_determinism", same ? 0.0 : 1.0, "<=", 0.0,
                           "bitwise equal histories with 1 and 2 workers"));

  TrainOptions o;
  o.widths = default_widths(4, 3, 2);
  o.epochs = 2000;
  o.restarts = 2;
  o.adam.learning_rate = 3e-2;
  const auto ra = train(affine.train, affine.test, o);
  const auto& best_a = ra.reports[ra.best_index];
  out.push_back(make_check("training", "affine_target_test_error", best_a.test_error, "<=", 1e-3,
                           "depth 2, learning rate 3e-2, 2000 epochs"));

  const auto relu = relu_target();
  o.widths = default_widths(4, 1);
  o.epochs = 5000;
  o.adam.learning_rate = 3e-3;
  const auto rr = train(relu.train, relu.test, o);
  const auto& best_r = rr.reports[rr.best_index];
  out.push_back(make_check("training", "relu_target_test_error", best_r.test_error, "<=", 1e-2,
                           "q = 1 + max(0, y1), depth 10, learning rate 3e-3, 5000 epochs"));
  const double frac = std::min(nonincreasing_window_fraction(best_a.loss_history, 500),
                               nonincreasing_window_fraction(best_r.loss_history, 500));
  out.push_back(make_check("training", "nonincreasing_500_epoch_windows", frac, ">=", 0.95));
  return out;
}

std::vector<std::string> suite_names() { return {"geometry", "fem", "mie", "kink", "gradcheck", "training"}; }

std::vector<Check> run_suite(const std::string& suite, const Logger& log) {
  if (log) log(fmt::format("running suite {}", suite));
  if (suite == "geometry") {
    auto out = shape_variation_checks();
    for (auto& c : geometry_checks()) out.push_back(std::move(c));
    return out;
  }
  if (suite == "fem") return fem_checks();
  if (suite == "mie") return mie_checks();
  if (suite == "kink") return kink_checks();
  if (suite == "gradcheck") return gradcheck_checks();
  if (suite == "training") return training_checks();
  throw std::invalid_argument(fmt::format("unknown suite '{}'", suite));
}

}  // namespace stochif
