#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <vector>

#include "aeroduo/world.hpp"

namespace aeroduo {

struct MapRegion {
  GridFrame frame;
  int width = 0;
  int height = 0;

  double x_max() const { return frame.x0 + width * frame.cell; }
  double y_max() const { return frame.y0 + height * frame.cell; }
};

struct ReconElevation {
  ElevationGrid grid;
  Grid2D<unsigned char> valid;
};

// Per-cell max-z binning of accumulated point clouds; cells with no points invalid.
inline ReconElevation reconstruct_elevation(const std::vector<PointCloud>& clouds,
                                            const MapRegion& region) {
  ReconElevation out;
  out.grid.frame = region.frame;
  out.grid.heights = Grid2D<double>(region.width, region.height, 0.0);
  out.valid = Grid2D<unsigned char>(region.width, region.height, 0);
  for (const auto& cloud : clouds) {
    for (const auto& p : cloud) {
      const int ix = region.frame.cell_x(p.x);
      const int iy = region.frame.cell_y(p.y);
      if (!out.grid.heights.in_bounds(ix, iy)) continue;
      if (!out.valid.at(ix, iy) || p.z > out.grid.heights.at(ix, iy))
        out.grid.heights.at(ix, iy) = p.z;
      out.valid.at(ix, iy) = 1;
    }
  }
  return out;
}

struct OrthoTile {
  Grid2D<int> semantic;
  Grid2D<double> elevation;
  Grid2D<unsigned char> valid;
  MapRegion region;
};

// Maps each valid BEV pixel to the ground cell under its nadir ray. Elevation
// prefers the point-cloud reconstruction where available, else camera z - depth.
inline OrthoTile reproject(const BEVObservation& obs, const ReconElevation& recon,
                           const MapRegion& clip) {
  const int n = obs.depth.width();
  const double px = (obs.x2 - obs.x1) / n;
  OrthoTile tile;
  tile.region = clip;
  tile.semantic = Grid2D<int>(clip.width, clip.height, kLabelTerrain);
  tile.elevation = Grid2D<double>(clip.width, clip.height, 0.0);
  tile.valid = Grid2D<unsigned char>(clip.width, clip.height, 0);
  for (int iy = 0; iy < clip.height; ++iy) {
    for (int ix = 0; ix < clip.width; ++ix) {
      const double gx = clip.frame.center_x(ix);
      const double gy = clip.frame.center_y(iy);
      if (gx < obs.x1 || gx >= obs.x2 || gy < obs.y1 || gy >= obs.y2) continue;
      const int bx = std::clamp(static_cast<int>((gx - obs.x1) / px), 0, n - 1);
      const int by = std::clamp(static_cast<int>((gy - obs.y1) / px), 0, n - 1);
      if (!obs.valid.at(bx, by)) continue;
      tile.semantic.at(ix, iy) = obs.semantic.at(bx, by);
      const int rx = recon.grid.frame.cell_x(gx);
      const int ry = recon.grid.frame.cell_y(gy);
      if (recon.valid.width() && recon.valid.in_bounds(rx, ry) && recon.valid.at(rx, ry))
        tile.elevation.at(ix, iy) = recon.grid.heights.at(rx, ry);
      else
        tile.elevation.at(ix, iy) = obs.camera_pose.position.z - obs.depth.at(bx, by);
      tile.valid.at(ix, iy) = 1;
    }
  }
  return tile;
}

struct StitchRecord {
  UAVState pose;
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;  // contributing footprint
};

constexpr int kOrthoHistoryCap = 5;

class OrthoMap {
 public:
  explicit OrthoMap(int output_size = 256, double base_cell = 1.0)
      : output_size_(output_size), base_cell_(base_cell) {}

  bool empty() const { return canvas_valid_.width() == 0; }
  int output_size() const { return output_size_; }
  double base_cell() const { return base_cell_; }

  // Resized N_o x N_o view, refreshed by stitch().
  const Grid2D<int>& semantic() const { return semantic_; }
  const Grid2D<double>& elevation() const { return elevation_; }
  const Grid2D<unsigned char>& valid() const { return valid_; }
  const GridFrame& frame() const { return frame_; }
  MapRegion region() const { return {frame_, output_size_, output_size_}; }

  const std::deque<StitchRecord>& history() const { return history_; }

  // Canvas accessors (fixed world-aligned lattice; exact, no resampling drift).
  MapRegion canvas_region() const {
    return {{canvas_ix0_ * base_cell_, canvas_iy0_ * base_cell_, base_cell_},
            canvas_valid_.width(), canvas_valid_.height()};
  }
  const Grid2D<int>& canvas_semantic() const { return canvas_semantic_; }
  const Grid2D<double>& canvas_elevation() const { return canvas_elevation_; }
  const Grid2D<unsigned char>& canvas_valid() const { return canvas_valid_; }

  double max_valid_elevation() const {
    double m = -std::numeric_limits<double>::infinity();
    for (int iy = 0; iy < canvas_valid_.height(); ++iy)
      for (int ix = 0; ix < canvas_valid_.width(); ++ix)
        if (canvas_valid_.at(ix, iy)) m = std::max(m, canvas_elevation_.at(ix, iy));
    return m;
  }

  friend OrthoMap stitch(const OrthoMap& ortho, const OrthoTile& tile, const UAVState& pose);

 private:
  void grow_to(int ix0, int iy0, int ix1, int iy1) {
    if (!empty()) {
      ix0 = std::min(ix0, canvas_ix0_);
      iy0 = std::min(iy0, canvas_iy0_);
      ix1 = std::max(ix1, canvas_ix0_ + canvas_valid_.width());
      iy1 = std::max(iy1, canvas_iy0_ + canvas_valid_.height());
    }
    const int w = ix1 - ix0, h = iy1 - iy0;
    if (!empty() && ix0 == canvas_ix0_ && iy0 == canvas_iy0_ && w == canvas_valid_.width() &&
        h == canvas_valid_.height())
      return;
    Grid2D<int> sem(w, h, kLabelTerrain);
    Grid2D<double> elev(w, h, 0.0);
    Grid2D<unsigned char> val(w, h, 0);
    for (int iy = 0; iy < canvas_valid_.height(); ++iy)
      for (int ix = 0; ix < canvas_valid_.width(); ++ix) {
        const int nx = ix + canvas_ix0_ - ix0, ny = iy + canvas_iy0_ - iy0;
        sem.at(nx, ny) = canvas_semantic_.at(ix, iy);
        elev.at(nx, ny) = canvas_elevation_.at(ix, iy);
        val.at(nx, ny) = canvas_valid_.at(ix, iy);
      }
    canvas_semantic_ = std::move(sem);
    canvas_elevation_ = std::move(elev);
    canvas_valid_ = std::move(val);
    canvas_ix0_ = ix0;
    canvas_iy0_ = iy0;
  }

  // Square-pad the canvas extent and resample nearest-neighbor to N_o x N_o.
  void refresh_view() {
    const auto reg = canvas_region();
    const double w = reg.width * base_cell_, h = reg.height * base_cell_;
    const double side = std::max(w, h);
    frame_ = {reg.frame.x0 - (side - w) / 2.0, reg.frame.y0 - (side - h) / 2.0,
              side / output_size_};
    semantic_ = Grid2D<int>(output_size_, output_size_, kLabelTerrain);
    elevation_ = Grid2D<double>(output_size_, output_size_, 0.0);
    valid_ = Grid2D<unsigned char>(output_size_, output_size_, 0);
    for (int iy = 0; iy < output_size_; ++iy)
      for (int ix = 0; ix < output_size_; ++ix) {
        const int cx = reg.frame.cell_x(frame_.center_x(ix));
        const int cy = reg.frame.cell_y(frame_.center_y(iy));
        if (!canvas_valid_.in_bounds(cx, cy) || !canvas_valid_.at(cx, cy)) continue;
        semantic_.at(ix, iy) = canvas_semantic_.at(cx, cy);
        elevation_.at(ix, iy) = canvas_elevation_.at(cx, cy);
        valid_.at(ix, iy) = 1;
      }
  }

  int output_size_;
  double base_cell_;
  Grid2D<int> canvas_semantic_;
  Grid2D<double> canvas_elevation_;
  Grid2D<unsigned char> canvas_valid_;
  int canvas_ix0_ = 0, canvas_iy0_ = 0;
  Grid2D<int> semantic_;
  Grid2D<double> elevation_;
  Grid2D<unsigned char> valid_;
  GridFrame frame_;
  std::deque<StitchRecord> history_;
};

// Newest-wins overwrite; history ring capped at 5 records, but cells written by
// evicted observations persist on the canvas.
inline OrthoMap stitch(const OrthoMap& ortho, const OrthoTile& tile, const UAVState& pose) {
  OrthoMap out = ortho;
  const double bc = out.base_cell_;
  const int ix0 = static_cast<int>(std::floor(tile.region.frame.x0 / bc));
  const int iy0 = static_cast<int>(std::floor(tile.region.frame.y0 / bc));
  const int ix1 = static_cast<int>(std::ceil(tile.region.x_max() / bc));
  const int iy1 = static_cast<int>(std::ceil(tile.region.y_max() / bc));
  out.grow_to(ix0, iy0, ix1, iy1);
  for (int iy = 0; iy < out.canvas_valid_.height(); ++iy)
    for (int ix = 0; ix < out.canvas_valid_.width(); ++ix) {
      const double gx = (out.canvas_ix0_ + ix + 0.5) * bc;
      const double gy = (out.canvas_iy0_ + iy + 0.5) * bc;
      const int tx = tile.region.frame.cell_x(gx);
      const int ty = tile.region.frame.cell_y(gy);
      if (!tile.valid.in_bounds(tx, ty) || !tile.valid.at(tx, ty)) continue;
      out.canvas_semantic_.at(ix, iy) = tile.semantic.at(tx, ty);
      out.canvas_elevation_.at(ix, iy) = tile.elevation.at(tx, ty);
      out.canvas_valid_.at(ix, iy) = 1;
    }
  out.history_.push_back({pose, tile.region.frame.x0, tile.region.frame.y0,
                          tile.region.x_max(), tile.region.y_max()});
  while (out.history_.size() > kOrthoHistoryCap) out.history_.pop_front();
  out.refresh_view();
  return out;
}

struct GlobalDepthMap {
  Grid2D<double> depth;
  Grid2D<unsigned char> valid;
  GridFrame frame;
  double reference_altitude = 0.0;
};

inline GlobalDepthMap global_depth(const OrthoMap& ortho, double z_h) {
  if (!ortho.empty() && z_h <= ortho.max_valid_elevation())
    throw std::domain_error("global_depth: reference altitude at or below terrain");
  GlobalDepthMap out;
  out.frame = ortho.frame();
  out.reference_altitude = z_h;
  const auto& elev = ortho.elevation();
  const auto& val = ortho.valid();
  out.depth = Grid2D<double>(elev.width(), elev.height(), 0.0);
  out.valid = val;
  for (int iy = 0; iy < elev.height(); ++iy)
    for (int ix = 0; ix < elev.width(); ++ix)
      if (val.at(ix, iy)) out.depth.at(ix, iy) = z_h - elev.at(ix, iy);
  return out;
}

}  // namespace aeroduo
