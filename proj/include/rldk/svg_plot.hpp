#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rldk {

struct PlotSeries {
  std::string name;
  std::vector<double> values;
};

/// Minimal line chart: shared x axis, one polyline per series, legend.
std::string render_svg_plot(const std::string& title, const std::string& x_label,
                            const std::vector<double>& x, const std::vector<PlotSeries>& series);

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::vector<double>& x,
                    const std::vector<PlotSeries>& series);

}  // namespace rldk
