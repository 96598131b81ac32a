#pragma once

// Static SVG scatter plot of a channel chart.  When ground truth is
// available each point is colored by its true bearing around the truth
// centroid, so a well-formed chart shows a smooth color wheel.

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace chanchart::cli {

void write_scatter_svg(const std::filesystem::path& path,
                       const std::vector<Eigen::Vector2d>& points,
                       const std::vector<Eigen::Vector2d>& truth, // empty: uniform color
                       const std::string& title);

} // namespace chanchart::cli
