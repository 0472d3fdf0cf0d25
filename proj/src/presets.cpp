#include <stdexcept>

#include <fmt/format.h>

#include "stochif/config.hpp"
#include "stochif/sweep.hpp"

namespace stochif {

namespace {

const std::vector<double> kDecays{1, 2, 3};
const std::vector<double> kDims{8, 16, 32, 64};
const std::vector<double> kPointCounts{1, 4, 8, 16, 64};

ExperimentConfig elliptic_base() {
  ExperimentConfig c;
  c.name = "elliptic";
  c.problem = ProblemKind::kElliptic;
  c.geometry.interface = InterfaceParams{0.5, 8, 3.0, 0.08, true};
  c.geometry.map = MapParams{0.125, 0.875};
  c.alpha_i = 10.0;
  c.mesh = MeshSizing{0.01, 0.06, 0.3, 1.0};
  return c;
}

ExperimentConfig helmholtz_base() {
  ExperimentConfig c;
  c.name = "helmholtz";
  c.problem = ProblemKind::kHelmholtz;
  c.geometry.interface = InterfaceParams{0.01, 8, 3.0, 0.08, true};
  c.geometry.map = MapParams{0.0025, 0.055};
  c.alpha_i = 10.0;
  c.kappa_ratio = 0.8;
  c.domain_radius = 0.055;
  c.pml_thickness = 0.02;
  c.pml_damping = 0.5;
  // About 12 elements per outer wavelength away from the interface.
  c.mesh = MeshSizing{0.0004, 0.0025, 0.3, 4.0};
  return c;
}

SweepSpec grid(std::string name, std::string title, ExperimentConfig base, SweepAxis axis,
               std::vector<double> columns, bool series = false) {
  SweepSpec s;
  s.name = std::move(name);
  s.title = std::move(title);
  s.base = std::move(base);
  s.base.name = s.name;
  s.rows = kDecays;
  s.axis = axis;
  s.columns = std::move(columns);
  s.series = series;
  return s;
}

std::vector<SweepSpec> all_presets() {
  std::vector<SweepSpec> out;

  SweepSpec t1 = grid("table1", "Maximal shape variation (percent of r0)", elliptic_base(), SweepAxis::kDimension,
                      kDims);
  t1.geometry_only = true;
  out.push_back(t1);

  for (const double alpha : {10.0, 100.0, 1000.0}) {
    auto e = elliptic_base();
    e.alpha_i = alpha;
    auto h = helmholtz_base();
    h.alpha_i = alpha;
    for (const int np : {1, 64}) {
      e.n_points = np;
      h.n_points = np;
      const int etable = np == 1 ? 2 : 3;
      const int htable = np == 1 ? 5 : 6;
      out.push_back(grid(fmt::format("table{}-alpha{:g}", etable, alpha),
                         fmt::format("Elliptic, N_p = {}, alpha_i = {:g}", np, alpha), e, SweepAxis::kDimension,
                         kDims));
      out.push_back(grid(fmt::format("table{}-alpha{:g}", htable, alpha),
                         fmt::format("Helmholtz, N_p = {}, alpha_i = {:g}, kappa_i/kappa_o = 0.8", np, alpha), h,
                         SweepAxis::kDimension, kDims));
    }
  }

  {
    auto e = elliptic_base();
    e.alpha_i = 100.0;
    e.geometry.interface.d = 32;
    auto s = grid("table4", "Elliptic, p = 1, d = 32, alpha_i = 100, x0 = (x1, 0)", e, SweepAxis::kPointRadius,
                  {0.40, 0.45, 0.5, 0.55, 0.60});
    s.rows = {1};
    out.push_back(s);
  }

  for (const int np : {1, 64}) {
    auto h = helmholtz_base();
    h.n_points = np;
    h.geometry.interface.d = 16;
    h.alpha_i = 1.0;
    out.push_back(grid(fmt::format("table7-{}pt", np), fmt::format("Helmholtz, N_p = {}, d = 16, alpha_i = 1", np), h,
                       SweepAxis::kKappaRatio, {0.8, 0.08, 0.008}));
    h.alpha_i = 100.0;
    out.push_back(grid(fmt::format("table8-{}pt", np),
                       fmt::format("Helmholtz, N_p = {}, d = 16, alpha_i = 100, kappa_o / k0", np), h,
                       SweepAxis::kKappaMultiplier, {1, 2, 3}));
  }

  for (const int np : {1, 64}) {
    auto e = elliptic_base();
    e.alpha_i = 1000.0;
    e.n_points = np;
    out.push_back(grid(fmt::format("figure3-{}pt", np), fmt::format("Elliptic, N_p = {}, alpha_i = 1000", np), e,
                       SweepAxis::kDimension, kDims, true));
    auto h = helmholtz_base();
    h.alpha_i = 1000.0;
    h.n_points = np;
    out.push_back(grid(fmt::format("figure5-{}pt", np), fmt::format("Helmholtz, N_p = {}, alpha_i = 1000", np), h,
                       SweepAxis::kDimension, kDims, true));
  }
  for (const int d : {32, 64}) {
    auto e = elliptic_base();
    e.alpha_i = 100.0;
    e.geometry.interface.d = d;
    out.push_back(grid(fmt::format("figure4-d{}", d), fmt::format("Elliptic, d = {}, alpha_i = 100", d), e,
                       SweepAxis::kPoints, kPointCounts, true));
    auto h = helmholtz_base();
    h.alpha_i = 100.0;
    h.geometry.interface.d = d;
    out.push_back(grid(fmt::format("figure6-d{}", d), fmt::format("Helmholtz, d = {}, alpha_i = 100", d), h,
                       SweepAxis::kPoints, kPointCounts, true));
  }
  return out;
}

bool strip_full_suffix(std::string& name) {
  constexpr std::string_view suffix = "-full";
  if (name.size() > suffix.size() && name.ends_with(suffix)) {
    name.resize(name.size() - suffix.size());
    return true;
  }
  return false;
}

}  // namespace

void apply_full_scale(ExperimentConfig& c) {
  c.n_train = 8192;
  c.n_test = 2048;
  c.train.epochs = 50000;
  c.train.restarts = 20;
  if (c.problem == ProblemKind::kElliptic) {
    c.mesh = MeshSizing{0.002, 0.035, 0.3, 1.0};
  } else {
    c.mesh = MeshSizing{0.00016 / c.kappa_multiplier, 0.0007 / c.kappa_multiplier, 0.3, 2.0};
  }
}

SweepSpec preset_sweep(const std::string& name) {
  std::string key = name;
  const bool full = strip_full_suffix(key);
  for (auto& s : all_presets()) {
    if (s.name != key) continue;
    if (full) {
      apply_full_scale(s.base);
      s.name = name;
      s.base.name = name;
    }
    return s;
  }
  throw std::invalid_argument(fmt::format("unknown preset '{}'", name));
}

std::vector<std::string> sweep_preset_names() {
  std::vector<std::string> out;
  for (const auto& s : all_presets()) out.push_back(s.name);
  return out;
}

ExperimentConfig preset_config(const std::string& name) {
  std::string key = name;
  const bool full = strip_full_suffix(key);
  ExperimentConfig c;
  if (key == "elliptic") {
    c = elliptic_base();
  } else if (key == "helmholtz") {
    c = helmholtz_base();
  } else {
    const auto s = preset_sweep(key);
    c = cell_config(s, s.rows.front(), s.columns.front());
  }
  if (full) apply_full_scale(c);
  c.name = name;
  return c;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out{"elliptic", "helmholtz"};
  for (auto& n : sweep_preset_names()) out.push_back(std::move(n));
  return out;
}

}  // namespace stochif
