#include "stochif/sweep.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace stochif {

namespace {

namespace fs = std::filesystem;

struct AxisInfo {
  SweepAxis axis;
  const char* name;
  const char* tag;
};

constexpr AxisInfo kAxes[] = {
    {SweepAxis::kDimension, "d", "d"},
    {SweepAxis::kAlpha, "alpha_i", "alpha"},
    {SweepAxis::kKappaRatio, "kappa_ratio", "ratio"},
    {SweepAxis::kKappaMultiplier, "kappa_multiplier", "kappa"},
    {SweepAxis::kPoints, "n_points", "np"},
    {SweepAxis::kPointRadius, "point_radius", "x"},
};

const AxisInfo& info(SweepAxis axis) {
  for (const auto& a : kAxes)
    if (a.axis == axis) return a;
  throw std::logic_error("unknown sweep axis");
}

std::optional<double> reuse_cell(const ExperimentConfig& c) {
  const fs::path path = fs::path(c.out_dir) / (c.name + ".json");
  if (!fs::exists(path)) return std::nullopt;
  nlohmann::json j;
  std::ifstream(path) >> j;
  if (j.value("config", nlohmann::json()) != nlohmann::json(c)) return std::nullopt;
  return j.at("test_error").get<double>();
}

std::string format_value(const SweepSpec& spec, const SweepCell& cell, bool markdown) {
  if (!cell.value) return markdown ? "failed" : "";
  if (spec.geometry_only) return markdown ? fmt::format("{:.2f}%", *cell.value) : fmt::format("{:.6f}", *cell.value);
  return markdown ? fmt::format("{:.2e}", *cell.value) : fmt::format("{:.10e}", *cell.value);
}

}  // namespace

std::string axis_name(SweepAxis axis) { return info(axis).name; }

SweepAxis axis_from_string(const std::string& s) {
  for (const auto& a : kAxes)
    if (s == a.name) return a.axis;
  throw std::invalid_argument(fmt::format("unknown sweep axis '{}'", s));
}

void to_json(nlohmann::json& j, const SweepSpec& s) {
  j = nlohmann::json{{"name", s.name},       {"title", s.title},   {"base", s.base},
                     {"rows", s.rows},       {"axis", axis_name(s.axis)}, {"columns", s.columns},
                     {"series", s.series},   {"geometry_only", s.geometry_only}};
}

void from_json(const nlohmann::json& j, SweepSpec& s) {
  s.name = j.at("name").get<std::string>();
  s.title = j.value("title", s.name);
  if (j.contains("base")) s.base = j.at("base").get<ExperimentConfig>();
  s.rows = j.at("rows").get<std::vector<double>>();
  s.axis = axis_from_string(j.at("axis").get<std::string>());
  s.columns = j.at("columns").get<std::vector<double>>();
  s.series = j.value("series", false);
  s.geometry_only = j.value("geometry_only", false);
}

ExperimentConfig cell_config(const SweepSpec& spec, double row, double column) {
  ExperimentConfig c = spec.base;
  c.geometry.interface.p = row;
  switch (spec.axis) {
    case SweepAxis::kDimension:
      c.geometry.interface.d = static_cast<int>(std::lround(column));
      break;
    case SweepAxis::kAlpha:
      c.alpha_i = column;
      break;
    case SweepAxis::kKappaRatio:
      c.kappa_ratio = column;
      break;
    case SweepAxis::kKappaMultiplier: {
      const double scale = spec.base.kappa_multiplier / column;
      c.kappa_multiplier = column;
      c.mesh.h_interface *= scale;
      c.mesh.h_far *= scale;
      break;
    }
    case SweepAxis::kPoints:
      c.n_points = static_cast<int>(std::lround(column));
      break;
    case SweepAxis::kPointRadius:
      c.point_radius = column;
      break;
  }
  InterfaceParams loose = c.geometry.interface;
  loose.strict_amplitude = false;
  c.geometry.interface.strict_amplitude =
      InterfaceModel(loose).amplitude_bound() <= 0.5 * loose.r0 * (1.0 + 1e-12);
  c.name = fmt::format("{}_p{:g}_{}{:g}", spec.name, row, info(spec.axis).tag, column);
  return c;
}

std::optional<LogFit> fit_log(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_log: x and y differ in length");
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0)) throw std::invalid_argument("fit_log: x must be positive");
    sx += std::log(x[k]);
    sy += y[k];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxx += dx * dx;
    sxy += dx * (y[k] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  LogFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

std::optional<LogFit> SweepResult::fit(std::size_t r) const {
  std::vector<double> x, y;
  for (std::size_t c = 0; c < spec.columns.size(); ++c) {
    const auto& cl = cell(r, c);
    if (cl.value) {
      x.push_back(cl.column);
      y.push_back(*cl.value);
    }
  }
  return fit_log(x, y);
}

SweepResult run_sweep(const SweepSpec& spec, const RunOptions& options) {
  SweepResult result;
  result.spec = spec;
  for (const double row : spec.rows) {
    for (const double column : spec.columns) {
      SweepCell cell;
      cell.row = row;
      cell.column = column;
      try {
        const ExperimentConfig c = cell_config(spec, row, column);
        if (spec.geometry_only) {
          cell.value = 100.0 * InterfaceModel(c.geometry.interface).max_shape_variation();
        } else if (auto cached = options.persist ? reuse_cell(c) : std::nullopt) {
          if (options.log) options.log(fmt::format("{}: reusing stored result", c.name));
          cell.value = cached;
        } else {
          cell.value = run_experiment(c, options).test_error;
        }
      } catch (const std::exception& e) {
        cell.error = e.what();
        if (options.log) options.log(fmt::format("cell p={:g} {}={:g} failed: {}", row, axis_name(spec.axis), column, e.what()));
      }
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

std::vector<std::string> write_sweep_tables(const SweepResult& result, const std::string& dir) {
  const auto& spec = result.spec;
  const fs::path base(dir);
  fs::create_directories(base);
  std::vector<std::string> written;

  const fs::path csv_path = base / (spec.name + ".csv");
  {
    std::ofstream csv(csv_path);
    csv << 'p';
    for (const double c : spec.columns) csv << ',' << fmt::format("{}={:g}", axis_name(spec.axis), c);
    csv << '\n';
    for (std::size_t r = 0; r < spec.rows.size(); ++r) {
      csv << fmt::format("{:g}", spec.rows[r]);
      for (std::size_t c = 0; c < spec.columns.size(); ++c) csv << ',' << format_value(spec, result.cell(r, c), false);
      csv << '\n';
    }
  }
  written.push_back(csv_path.string());

  const fs::path md_path = base / (spec.name + ".md");
  {
    std::ofstream md(md_path);
    md << "## " << (spec.title.empty() ? spec.name : spec.title) << "\n\n";
    md << "| p \\ " << axis_name(spec.axis) << " |";
    for (const double c : spec.columns) md << fmt::format(" {:g} |", c);
    md << "\n|---|";
    for (std::size_t c = 0; c < spec.columns.size(); ++c) md << "---|";
    md << '\n';
    for (std::size_t r = 0; r < spec.rows.size(); ++r) {
      md << fmt::format("| {:g} |", spec.rows[r]);
      for (std::size_t c = 0; c < spec.columns.size(); ++c) md << ' ' << format_value(spec, result.cell(r, c), true) << " |";
      md << '\n';
    }
  }
  written.push_back(md_path.string());

  if (spec.series) {
    const fs::path fits_path = base / (spec.name + "_fits.csv");
    std::ofstream fits(fits_path);
    fits << "series,intercept,slope\n";
    for (std::size_t r = 0; r < spec.rows.size(); ++r) {
      const auto label = fmt::format("p={:g}", spec.rows[r]);
      const fs::path path = base / fmt::format("{}_p{:g}.csv", spec.name, spec.rows[r]);
      std::ofstream s(path);
      s << "# label: " << label << '\n' << "# x: " << axis_name(spec.axis) << '\n' << "x,error\n";
      for (std::size_t c = 0; c < spec.columns.size(); ++c) {
        const auto& cl = result.cell(r, c);
        if (cl.value) s << fmt::format("{:g},{:.10e}\n", cl.column, *cl.value);
      }
      written.push_back(path.string());
      if (const auto f = result.fit(r)) fits << fmt::format("{},{:.10e},{:.10e}\n", label, f->intercept, f->slope);
    }
    written.push_back(fits_path.string());
  }
  return written;
}

}  // namespace stochif
