// Static line plots written as standalone SVG files.
#pragma once

#include <string>
#include <vector>

namespace terra::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool dashed = false;
};

/// Shaded region between `lower` and `upper` over `x`.
struct Band {
    std::vector<double> x;
    std::vector<double> lower;
    std::vector<double> upper;
    std::string color = "#1f77b4";
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    std::vector<Band> bands;
    /// Equal scaling on both axes (trajectory plots).
    bool equal_aspect = false;
    int width = 800;
    int height = 480;
};

/// Renders the plot; output is a deterministic function of the input.
std::string render(const Plot& plot);
void write(const Plot& plot, const std::string& path);

} // namespace terra::svg
