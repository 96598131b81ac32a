#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "chanchart/errors.hpp"

namespace chanchart::cli {

namespace {

std::string hue_to_hex(double hue01) {
    // Fixed saturation/lightness HSL -> RGB.
    const double h = 6.0 * std::clamp(hue01, 0.0, 1.0);
    const double s = 0.75;
    const double l = 0.5;
    const double c = (1.0 - std::abs(2.0 * l - 1.0)) * s;
    const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h) % 6) {
        case 0: r = c; g = x; break;
        case 1: r = x; g = c; break;
        case 2: g = c; b = x; break;
        case 3: g = x; b = c; break;
        case 4: r = x; b = c; break;
        default: r = c; b = x; break;
    }
    const double m = l - c / 2.0;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(std::lround((r + m) * 255.0)),
                  static_cast<int>(std::lround((g + m) * 255.0)),
                  static_cast<int>(std::lround((b + m) * 255.0)));
    return buf;
}

} // namespace

void write_scatter_svg(const std::filesystem::path& path,
                       const std::vector<Eigen::Vector2d>& points,
                       const std::vector<Eigen::Vector2d>& truth, const std::string& title) {
    if (!truth.empty() && truth.size() != points.size())
        throw ShapeError("write_scatter_svg: truth/points size mismatch");

    constexpr double kCanvas = 640.0;
    constexpr double kPad = 48.0;

    double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0;
    if (!points.empty()) {
        min_x = max_x = points[0](0);
        min_y = max_y = points[0](1);
        for (const auto& p : points) {
            min_x = std::min(min_x, p(0));
            max_x = std::max(max_x, p(0));
            min_y = std::min(min_y, p(1));
            max_y = std::max(max_y, p(1));
        }
    }
    const double span = std::max({max_x - min_x, max_y - min_y, 1e-9});
    const double scale = (kCanvas - 2.0 * kPad) / span;
    const double cx = (min_x + max_x) / 2.0;
    const double cy = (min_y + max_y) / 2.0;

    Eigen::Vector2d truth_center = Eigen::Vector2d::Zero();
    for (const auto& t : truth) truth_center += t;
    if (!truth.empty()) truth_center /= static_cast<double>(truth.size());

    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    std::fprintf(f, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    std::fprintf(f,
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                 "viewBox=\"0 0 %.0f %.0f\">\n",
                 kCanvas, kCanvas, kCanvas, kCanvas);
    std::fprintf(f, "<rect width=\"%.0f\" height=\"%.0f\" fill=\"white\"/>\n", kCanvas, kCanvas);
    std::fprintf(f, "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
                    "stroke=\"#cccccc\"/>\n",
                 kPad, kPad, kCanvas - 2 * kPad, kCanvas - 2 * kPad);
    std::fprintf(f, "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"16\">",
                 kPad, kPad - 14.0);
    for (char ch : title) {
        switch (ch) {
            case '&': std::fputs("&amp;", f); break;
            case '<': std::fputs("&lt;", f); break;
            case '>': std::fputs("&gt;", f); break;
            default: std::fputc(ch, f);
        }
    }
    std::fputs("</text>\n", f);

    for (std::size_t i = 0; i < points.size(); ++i) {
        const double px = kCanvas / 2.0 + (points[i](0) - cx) * scale;
        const double py = kCanvas / 2.0 - (points[i](1) - cy) * scale; // y up
        std::string color = "#4682b4";
        if (!truth.empty()) {
            const Eigen::Vector2d d = truth[i] - truth_center;
            const double ang = std::atan2(d(1), d(0)); // [-pi, pi]
            color = hue_to_hex((ang + std::numbers::pi) / (2.0 * std::numbers::pi));
        }
        std::fprintf(f, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.4\" fill=\"%s\" fill-opacity=\"0.8\"/>\n",
                     px, py, color.c_str());
    }
    std::fputs("</svg>\n", f);
    if (std::fclose(f) != 0) throw IoError("failed to finalize " + path.string());
}

} // namespace chanchart::cli
