#include "stochif/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "stochif/sweep.hpp"

namespace stochif {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

Series read_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open series file '{}'", path));
  Series s;
  s.label = path;
  std::string line;
  bool header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (line.starts_with("# label:")) {
      s.label = trim(line.substr(8));
    } else if (line.starts_with("# x:")) {
      s.x_name = trim(line.substr(4));
    } else if (line.starts_with('#')) {
      continue;
    } else if (!header) {
      if (line != "x,error") throw std::runtime_error(fmt::format("{}:{}: expected header 'x,error'", path, lineno));
      header = true;
    } else {
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw std::runtime_error(fmt::format("{}:{}: expected 'x,error'", path, lineno));
      std::size_t used = 0;
      double x = 0.0, y = 0.0;
      try {
        const auto xs = line.substr(0, comma);
        x = std::stod(xs, &used);
        if (used != xs.size()) throw std::invalid_argument(xs);
        const auto ys = line.substr(comma + 1);
        y = std::stod(ys, &used);
        if (used != ys.size()) throw std::invalid_argument(ys);
      } catch (const std::exception&) {
        throw std::runtime_error(fmt::format("{}:{}: malformed number", path, lineno));
      }
      if (!(x > 0.0) || !std::isfinite(y)) throw std::runtime_error(fmt::format("{}:{}: need x > 0 and finite y", path, lineno));
      s.x.push_back(x);
      s.y.push_back(y);
    }
  }
  if (!header) throw std::runtime_error(fmt::format("'{}' is not a series file", path));
  return s;
}

void write_series(const Series& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  out << "# label: " << s.label << "\n# x: " << s.x_name << "\nx,error\n";
  for (std::size_t k = 0; k < s.x.size(); ++k) out << fmt::format("{:g},{:.10e}\n", s.x[k], s.y[k]);
}

std::string render_svg(const std::vector<Series>& series, const std::string& title) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  std::vector<double> xticks;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      xmin = std::min(xmin, s.x[k]);
      xmax = std::max(xmax, s.x[k]);
      ymin = std::min(ymin, s.y[k]);
      ymax = std::max(ymax, s.y[k]);
      xticks.push_back(s.x[k]);
    }
  }
  if (xticks.empty()) {
    xmin = 1.0;
    xmax = 10.0;
    ymin = 0.0;
    ymax = 1.0;
  }
  std::sort(xticks.begin(), xticks.end());
  xticks.erase(std::unique(xticks.begin(), xticks.end()), xticks.end());
  double lx0 = std::log(xmin), lx1 = std::log(xmax);
  if (lx1 - lx0 < 1e-12) {
    lx0 -= 0.5;
    lx1 += 0.5;
  }
  const double pad = 0.05 * (lx1 - lx0);
  lx0 -= pad;
  lx1 += pad;
  if (ymax - ymin < 1e-300) {
    const double m = ymax == 0.0 ? 1.0 : std::abs(ymax) * 0.1;
    ymin -= m;
    ymax += m;
  }
  const double ypad = 0.08 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + pw * (std::log(x) - lx0) / (lx1 - lx0); };
  auto py = [&](double y) { return kTop + ph * (1.0 - (y - ymin) / (ymax - ymin)); };

  std::string out;
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight, kWidth, kHeight);
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", kWidth, kHeight);
  out += fmt::format("<text x=\"{:.1f}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                     kLeft + pw / 2, escape(title));
  out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
                     kLeft, kTop, pw, ph);

  for (const double x : xticks) {
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n", px(x),
                       kTop + ph, kTop + ph + 5);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:g}</text>\n", px(x), kTop + ph + 18, x);
  }
  for (int k = 0; k <= 4; ++k) {
    const double y = ymin + (ymax - ymin) * k / 4.0;
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#dddddd\"/>\n", kLeft,
                       py(y), kLeft + pw);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n", kLeft - 6, py(y) + 4, y);
  }
  const std::string xlabel = series.empty() ? "x" : series.front().x_name;
  out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{} (log scale)</text>\n", kLeft + pw / 2,
                     kHeight - 16, escape(xlabel));
  out += fmt::format("<text x=\"16\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1f})\">error</text>\n",
                     kTop + ph / 2, kTop + ph / 2);

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kColors[i % std::size(kColors)];
    if (const auto f = fit_log(s.x, s.y)) {
      const double a = *std::min_element(s.x.begin(), s.x.end());
      const double b = *std::max_element(s.x.begin(), s.x.end());
      out += fmt::format(
          "<line class=\"fit\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
          px(a), py(f->intercept + f->slope * std::log(a)), px(b), py(f->intercept + f->slope * std::log(b)), color);
    }
    for (std::size_t k = 0; k < s.x.size(); ++k)
      out += fmt::format("<circle class=\"marker\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"{}\"/>\n", px(s.x[k]),
                         py(s.y[k]), color);
    const double ly = kTop + 14 + 20.0 * static_cast<double>(i);
    const double lx = kLeft + pw + 16;
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"{}\"/>\n", lx, ly, color);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", lx + 10, ly + 4, escape(s.label));
  }
  out += "</svg>\n";
  return out;
}

void plot_files(const std::vector<std::string>& files, const std::string& svg_path, const std::string& title) {
  std::vector<Series> series;
  for (const auto& f : files) series.push_back(read_series(f));
  std::ofstream out(svg_path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", svg_path));
  out << render_svg(series, title);
}

}  // namespace stochif
