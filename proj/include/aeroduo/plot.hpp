#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "aeroduo/episode.hpp"
#include "aeroduo/grid.hpp"

namespace aeroduo {

// Deterministic SVG renderers; identical inputs produce identical bytes.

inline std::string svg_gray(double v01) {
  const int g = std::clamp(static_cast<int>(std::lround(v01 * 255.0)), 0, 255);
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", g, g, g);
  return buf;
}

// Heatmap of a grid (prob/occ/elev/depth); invalid cells rendered dark red.
inline void plot_grid(std::ostream& os, const LoadedGrid& grid, int cell_px = 3) {
  const int w = grid.values.width(), h = grid.values.height();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < w; ++ix)
      if (grid.valid.at(ix, iy)) {
        lo = std::min(lo, grid.values.at(ix, iy));
        hi = std::max(hi, grid.values.at(ix, iy));
      }
  if (!(hi > lo)) { lo = 0.0; hi = 1.0; }
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w * cell_px << "\" height=\""
     << h * cell_px << "\">\n";
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < w; ++ix) {
      std::string fill = "#400000";
      if (grid.valid.at(ix, iy))
        fill = svg_gray((grid.values.at(ix, iy) - lo) / (hi - lo));
      // y axis flipped so north is up
      os << "<rect x=\"" << ix * cell_px << "\" y=\"" << (h - 1 - iy) * cell_px << "\" width=\""
         << cell_px << "\" height=\"" << cell_px << "\" fill=\"" << fill << "\"/>\n";
    }
  os << "</svg>\n";
}

// Trajectory overlay: grid backdrop plus one polyline + point markers per path.
inline void plot_trajectories(std::ostream& os, const LoadedGrid& grid,
                              const std::vector<std::vector<TimedPoint>>& trajs,
                              const std::vector<std::string>& colors, int cell_px = 3) {
  const int w = grid.values.width(), h = grid.values.height();
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w * cell_px << "\" height=\""
     << h * cell_px << "\">\n";
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < w; ++ix) {
      const bool v = grid.valid.at(ix, iy) && grid.values.at(ix, iy) > 0.5;
      os << "<rect x=\"" << ix * cell_px << "\" y=\"" << (h - 1 - iy) * cell_px << "\" width=\""
         << cell_px << "\" height=\"" << cell_px << "\" fill=\"" << (v ? "#e8e8e8" : "#303030")
         << "\"/>\n";
    }
  auto px = [&](const Vec3& p) {
    const double fx = (p.x - grid.frame.x0) / grid.frame.cell * cell_px;
    const double fy = (h - (p.y - grid.frame.y0) / grid.frame.cell) * cell_px;
    return std::pair<double, double>{fx, fy};
  };
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const std::string color = i < colors.size() ? colors[i] : "#ff0000";
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& tp : trajs[i]) {
      auto [x, y] = px(tp.p);
      os << format_double(x) << ',' << format_double(y) << ' ';
    }
    os << "\"/>\n";
    for (const auto& tp : trajs[i]) {
      auto [x, y] = px(tp.p);
      os << "<circle cx=\"" << format_double(x) << "\" cy=\"" << format_double(y)
         << "\" r=\"1\" fill=\"" << color << "\"/>\n";
    }
  }
  os << "</svg>\n";
}

}  // namespace aeroduo
