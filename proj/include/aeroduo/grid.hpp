#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aeroduo {

// Ground-plane raster frame: world (x, y) of the lower corner plus cell size.
// Cell (ix, iy) covers [x0 + ix*cell, x0 + (ix+1)*cell) x [y0 + iy*cell, ...).
struct GridFrame {
  double x0 = 0.0;
  double y0 = 0.0;
  double cell = 1.0;

  double center_x(int ix) const { return x0 + (ix + 0.5) * cell; }
  double center_y(int iy) const { return y0 + (iy + 0.5) * cell; }
  int cell_x(double x) const { return static_cast<int>(std::floor((x - x0) / cell)); }
  int cell_y(double y) const { return static_cast<int>(std::floor((y - y0) / cell)); }
};

template <typename T>
class Grid2D {
 public:
  Grid2D() = default;
  Grid2D(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && ix < width_ && iy >= 0 && iy < height_;
  }
  T& at(int ix, int iy) { return data_[static_cast<std::size_t>(iy) * width_ + ix]; }
  const T& at(int ix, int iy) const { return data_[static_cast<std::size_t>(iy) * width_ + ix]; }

  std::vector<T>& raw() { return data_; }
  const std::vector<T>& raw() const { return data_; }

  bool operator==(const Grid2D&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// Shortest round-trippable decimal form of a double.
inline std::string format_double(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// `GRID v1 kind H W cell_size x0 y0` followed by H rows of W values, nan = invalid.
inline void dump_grid(std::ostream& os, const std::string& kind, const Grid2D<double>& g,
                      const Grid2D<unsigned char>& valid, const GridFrame& frame) {
  os << "GRID v1 " << kind << ' ' << g.height() << ' ' << g.width() << ' '
     << format_double(frame.cell) << ' ' << format_double(frame.x0) << ' '
     << format_double(frame.y0) << '\n';
  for (int iy = 0; iy < g.height(); ++iy) {
    for (int ix = 0; ix < g.width(); ++ix) {
      if (ix) os << ' ';
      if (valid.width() && !valid.at(ix, iy))
        os << "nan";
      else
        os << format_double(g.at(ix, iy));
    }
    os << '\n';
  }
}

struct LoadedGrid {
  std::string kind;
  Grid2D<double> values;
  Grid2D<unsigned char> valid;
  GridFrame frame;
};

inline LoadedGrid load_grid(std::istream& is) {
  std::string magic, ver, kind;
  int h = 0, w = 0;
  GridFrame frame;
  is >> magic >> ver >> kind >> h >> w >> frame.cell >> frame.x0 >> frame.y0;
  if (magic != "GRID" || ver != "v1" || h <= 0 || w <= 0)
    throw std::runtime_error("bad GRID header");
  LoadedGrid out{kind, Grid2D<double>(w, h), Grid2D<unsigned char>(w, h, 1), frame};
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) {
      std::string tok;
      if (!(is >> tok)) throw std::runtime_error("truncated GRID body");
      if (tok == "nan") {
        out.valid.at(ix, iy) = 0;
        out.values.at(ix, iy) = std::nan("");
      } else {
        out.values.at(ix, iy) = std::strtod(tok.c_str(), nullptr);
      }
    }
  }
  return out;
}

}  // namespace aeroduo
