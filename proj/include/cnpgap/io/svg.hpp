#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cnpgap::io {

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
    std::string color;  // empty: taken from the default palette
    bool dashed = false;
    bool markers = false;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = true;
    bool log_y = true;
    std::vector<PlotSeries> series;
};

/// Standalone SVG document for a line chart. Points that cannot be placed on
/// a log axis (non-positive or non-finite) are dropped.
std::string render_svg(const PlotSpec& spec);

}  // namespace cnpgap::io
