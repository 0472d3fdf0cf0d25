#pragma once

#include <string>
#include <vector>

namespace stochif {

/// One curve of a figure: "# label: ..." and "# x: ..." header lines, then
/// "x,error" rows.
struct Series {
  std::string label;
  std::string x_name = "x";
  std::vector<double> x;
  std::vector<double> y;
};

/// Throws std::runtime_error on a malformed file.
Series read_series(const std::string& path);
void write_series(const Series& s, const std::string& path);

/// Self-contained SVG with a logarithmic x axis, one marker per point and the
/// least-squares line in log(x) for series with at least two points.
std::string render_svg(const std::vector<Series>& series, const std::string& title);

/// Reads the series files and writes the SVG.
void plot_files(const std::vector<std::string>& files, const std::string& svg_path, const std::string& title);

}  // namespace stochif
