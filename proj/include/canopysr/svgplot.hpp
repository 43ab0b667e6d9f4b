// Small self-contained SVG chart writers for run reports: line charts for
// spectral profiles and loss curves, box plots for per-bin error spreads.
#pragma once

#include <string>
#include <vector>

#include "canopysr/metrics.hpp"

namespace canopysr {

struct PlotSeries {
  std::string label;
  std::string color; // empty picks from the default palette
  std::vector<double> x;
  std::vector<double> y;
};

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<PlotSeries>& series);

void write_boxplot(const std::string& path, const std::string& title,
                   const std::string& y_label,
                   const std::vector<BinStat>& bins);

} // namespace canopysr
