#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stochif/config.hpp"
#include "stochif/experiment.hpp"

namespace stochif {

enum class SweepAxis { kDimension, kAlpha, kKappaRatio, kKappaMultiplier, kPoints, kPointRadius };

std::string axis_name(SweepAxis axis);
SweepAxis axis_from_string(const std::string& s);

/// Grid of experiments: rows are decays p, columns the values of one axis.
struct SweepSpec {
  std::string name;
  std::string title;
  ExperimentConfig base;
  std::vector<double> rows;
  SweepAxis axis = SweepAxis::kDimension;
  std::vector<double> columns;
  /// Figure-type sweep: also emit one series per row and a fit in log(x).
  bool series = false;
  /// Cells hold max_shape_variation in percent, no PDE or training.
  bool geometry_only = false;
};

void to_json(nlohmann::json& j, const SweepSpec& s);
void from_json(const nlohmann::json& j, SweepSpec& s);

/// Base config with p = row and the axis set to column. Switches off the strict
/// amplitude bound when the coefficients exceed it and rescales the mesh with
/// the wavenumber multiplier.
ExperimentConfig cell_config(const SweepSpec& spec, double row, double column);

struct SweepCell {
  double row = 0.0;
  double column = 0.0;
  std::optional<double> value;
  std::string error;
};

/// y = intercept + slope * ln(x).
struct LogFit {
  double intercept = 0.0;
  double slope = 0.0;
};

/// Least squares in ln(x); nullopt for fewer than two points.
std::optional<LogFit> fit_log(std::span<const double> x, std::span<const double> y);

struct SweepResult {
  SweepSpec spec;
  /// Row-major over (rows, columns).
  std::vector<SweepCell> cells;

  const SweepCell& cell(std::size_t r, std::size_t c) const { return cells[r * spec.columns.size() + c]; }
  /// Fit of row r over the completed columns.
  std::optional<LogFit> fit(std::size_t r) const;
};

/// Runs every cell as an experiment named <name>_p<row>_<axis><column>. A cell
/// whose result record already exists under out_dir with the same config is
/// reused; a failing cell is recorded and the sweep continues.
SweepResult run_sweep(const SweepSpec& spec, const RunOptions& options = {});

/// <name>.csv and <name>.md, and for series sweeps <name>_p<p>.csv per row
/// plus <name>_fits.csv. Returns the written paths.
std::vector<std::string> write_sweep_tables(const SweepResult& result, const std::string& dir);

/// Table and figure presets ("table1", "table2-alpha10", ..., "figure6-d64"),
/// with an optional "-full" suffix.
SweepSpec preset_sweep(const std::string& name);
std::vector<std::string> sweep_preset_names();

}  // namespace stochif
