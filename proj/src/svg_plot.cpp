#include "rldk/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "rldk/csv.hpp"
#include "rldk/errors.hpp"

namespace rldk {

namespace {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;
constexpr std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c",
                                             "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

std::string render_svg_plot(const std::string& title, const std::string& x_label,
                            const std::vector<double>& x, const std::vector<PlotSeries>& series) {
  for (const auto& s : series) {
    if (s.values.size() != x.size()) throw ShapeError("svg plot: series length differs from x");
  }
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (double v : x) {
    x_min = std::min(x_min, v);
    x_max = std::max(x_max, v);
  }
  for (const auto& s : series) {
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (!(x_max > x_min)) x_max = x_min + 1.0;
  if (!std::isfinite(y_min)) y_min = 0.0, y_max = 1.0;
  if (!(y_max > y_min)) y_max = y_min + 1.0;
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto sx = [&](double v) { return kLeft + (v - x_min) / (x_max - x_min) * pw; };
  const auto sy = [&](double v) { return kTop + (y_max - v) / (y_max - y_min) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(title) << "</text>\n"
     << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 4.0;
    const double yv = y_min + (y_max - y_min) * i / 4.0;
    os << "<text x=\"" << sx(xv) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
       << tick(xv) << "</text>\n"
       << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
       << tick(yv) << "</text>\n"
       << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw << "\" y1=\"" << sy(yv) << "\" y2=\""
       << sy(yv) << "\" stroke=\"#eee\"/>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % kColors.size()];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = series[s].values[i];
      if (!std::isfinite(v)) continue;
      os << format_double(sx(x[i])) << ',' << format_double(sy(v)) << ' ';
    }
    os << "\"/>\n";
    const double ly = kTop + 16 + 18.0 * static_cast<double>(s);
    os << "<line x1=\"" << kLeft + pw + 12 << "\" x2=\"" << kLeft + pw + 32 << "\" y1=\"" << ly
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << kLeft + pw + 38 << "\" y=\"" << ly + 4 << "\">" << escape(series[s].name)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::vector<double>& x,
                    const std::vector<PlotSeries>& series) {
  write_text_file(path, render_svg_plot(title, x_label, x, series));
}

}  // namespace rldk
