#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "aeroduo/pathfinder.hpp"

namespace aeroduo {

struct DegenerateMapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Normalized target-location distribution over an ortho map frame.
struct ProbabilityMap {
  Grid2D<double> prob;
  GridFrame frame;

  double sum() const {
    double s = 0.0;
    for (double v : prob.raw()) s += v;
    return s;
  }
  CellIndex argmax() const {
    CellIndex best{0, 0};
    double bv = -1.0;
    for (int iy = 0; iy < prob.height(); ++iy)
      for (int ix = 0; ix < prob.width(); ++ix)
        if (prob.at(ix, iy) > bv) {
          bv = prob.at(ix, iy);
          best = {ix, iy};
        }
    return best;
  }
};

struct PilotDecision {
  ProbabilityMap prob_map;
  double high_heading = 0.0;
  double high_step = 0.0;
};

inline ProbabilityMap uniform_over_free(const OccupancyGrid& occ) {
  ProbabilityMap map;
  map.frame = occ.frame;
  map.prob = Grid2D<double>(occ.cells.width(), occ.cells.height(), 0.0);
  int free_cells = 0;
  for (unsigned char c : occ.cells.raw()) free_cells += c;
  if (free_cells == 0) throw DegenerateMapError("no free cells for uniform fallback");
  for (int iy = 0; iy < occ.cells.height(); ++iy)
    for (int ix = 0; ix < occ.cells.width(); ++ix)
      if (occ.cells.at(ix, iy)) map.prob.at(ix, iy) = 1.0 / free_cells;
  return map;
}

// Isotropic Gaussian at cell centers, occupancy-suppressed, sum-normalized.
// A center outside the frame is clamped to the nearest in-frame cell center.
inline ProbabilityMap oracle_gaussian_map(double center_x, double center_y,
                                          const MapRegion& region, const OccupancyGrid& occ,
                                          double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("oracle_gaussian_map: sigma must be positive");
  const GridFrame& f = region.frame;
  double gx = center_x, gy = center_y;
  if (gx < f.x0 || gx > region.x_max() || gy < f.y0 || gy > region.y_max()) {
    gx = f.center_x(std::clamp(f.cell_x(center_x), 0, region.width - 1));
    gy = f.center_y(std::clamp(f.cell_y(center_y), 0, region.height - 1));
  }

  ProbabilityMap map;
  map.frame = f;
  map.prob = Grid2D<double>(region.width, region.height, 0.0);
  double total = 0.0;
  for (int iy = 0; iy < region.height; ++iy)
    for (int ix = 0; ix < region.width; ++ix) {
      if (!occ.cells.at(ix, iy)) continue;
      const double dx = f.center_x(ix) - gx;
      const double dy = f.center_y(iy) - gy;
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      map.prob.at(ix, iy) = v;
      total += v;
    }
  if (total <= 0.0)
    throw DegenerateMapError("oracle_gaussian_map: all probability mass suppressed");
  for (double& v : map.prob.raw()) v /= total;
  return map;
}

// Probability-weighted mean grid index (fractional): (sum p*ix, sum p*iy).
inline std::pair<double, double> centroid(const ProbabilityMap& map) {
  double s = map.sum();
  if (std::abs(s - 1.0) > 1e-6)
    throw std::invalid_argument("centroid: probability map is not normalized");
  double mx = 0.0, my = 0.0;
  for (int iy = 0; iy < map.prob.height(); ++iy)
    for (int ix = 0; ix < map.prob.width(); ++ix) {
      const double p = map.prob.at(ix, iy);
      mx += p * ix;
      my += p * iy;
    }
  return {mx, my};
}

inline Vec3 map_to_global(double xc, double yc, const GridFrame& frame, double z_l) {
  return {frame.x0 + (xc + 0.5) * frame.cell, frame.y0 + (yc + 0.5) * frame.cell, z_l};
}

class PilotPolicy {
 public:
  virtual ~PilotPolicy() = default;
  virtual PilotDecision decide(const OrthoMap& ortho, const GlobalDepthMap& depth,
                               const std::vector<Vec3>& high_history,
                               const Instruction& instruction) = 0;
};

struct PilotConfig {
  double sigma = 10.0;       // meters
  double high_step_max = 50.0;  // L_h
  double z_low = 20.0;       // low UAV cruise altitude, for occupancy suppression
};

inline PilotDecision finish_decision(ProbabilityMap map, const std::vector<Vec3>& high_history,
                                     const PilotConfig& cfg) {
  const auto [cx, cy] = centroid(map);
  const Vec3 goal = map_to_global(cx, cy, map.frame, cfg.z_low);
  PilotDecision d{std::move(map), 0.0, 0.0};
  if (!high_history.empty()) {
    const Vec3& cur = high_history.back();
    const double dist = distance_xy(goal, cur);
    d.high_heading = std::atan2(goal.y - cur.y, goal.x - cur.x);
    d.high_step = std::min(cfg.high_step_max, dist);
  }
  return d;
}

// Ground-truth-privileged pilot: Gaussian centered at the known goal projection,
// suppressed by the derived occupancy, normalized. Mirrors the finetuning label
// pipeline.
class OraclePilot : public PilotPolicy {
 public:
  OraclePilot(Vec3 goal, PilotConfig cfg = {}) : goal_(goal), cfg_(cfg) {}

  PilotDecision decide(const OrthoMap& ortho, const GlobalDepthMap& depth,
                       const std::vector<Vec3>& high_history, const Instruction&) override {
    const double dz = depth.reference_altitude - cfg_.z_low;
    OccupancyGrid occ = occupancy_from_depth(depth, dz);
    MapRegion region{depth.frame, depth.depth.width(), depth.depth.height()};
    ProbabilityMap map;
    try {
      map = oracle_gaussian_map(goal_.x, goal_.y, region, occ, cfg_.sigma);
    } catch (const DegenerateMapError&) {
      map = uniform_over_free(occ);  // rethrows if no free cells at all
    }
    return finish_decision(std::move(map), high_history, cfg_);
  }

 private:
  Vec3 goal_;
  PilotConfig cfg_;
};

struct HeuristicPilotConfig {
  PilotConfig base;
  double w_category = 8.0;
  double w_direction = 2.0;
  double w_surroundings = 1.0;
  double temperature = 0.5;
};

// Compass sector of a bearing: 0=E, 1=NE, ... 7=SE.
inline int compass_sector(double bearing) {
  int s = static_cast<int>(std::lround(bearing / (kPi / 4.0)));
  return ((s % 8) + 8) % 8;
}

inline const char* compass_name(int sector) {
  static const char* names[8] = {"east",  "northeast", "north", "northwest",
                                 "west",  "southwest", "south", "southeast"};
  return names[((sector % 8) + 8) % 8];
}

// Non-oracle baseline: scores free map cells by semantic category match,
// direction-hint sector membership, and adjacency to matching surroundings,
// then softmax + suppression + normalization.
class HeuristicPilot : public PilotPolicy {
 public:
  HeuristicPilot(std::map<int, std::string> label_categories, Vec3 episode_start,
                 HeuristicPilotConfig cfg = {})
      : labels_(std::move(label_categories)), start_(episode_start), cfg_(cfg) {}

  PilotDecision decide(const OrthoMap& ortho, const GlobalDepthMap& depth,
                       const std::vector<Vec3>& high_history,
                       const Instruction& instruction) override {
    const double dz = depth.reference_altitude - cfg_.base.z_low;
    OccupancyGrid occ = occupancy_from_depth(depth, dz);
    const auto& sem = ortho.semantic();
    const auto& val = ortho.valid();
    const int w = occ.cells.width(), h = occ.cells.height();

    Grid2D<double> score(w, h, 0.0);
    bool any_signal = false;
    for (int iy = 0; iy < h; ++iy)
      for (int ix = 0; ix < w; ++ix) {
        if (!occ.cells.at(ix, iy) || !val.at(ix, iy)) continue;
        double s = 0.0;
        if (category_matches(sem.at(ix, iy), instruction.target_category))
          s += cfg_.w_category;
        if (instruction.direction_hint >= 0) {
          const double bx = occ.frame.center_x(ix) - start_.x;
          const double by = occ.frame.center_y(iy) - start_.y;
          if ((bx != 0.0 || by != 0.0) &&
              compass_sector(std::atan2(by, bx)) == instruction.direction_hint)
            s += cfg_.w_direction;
        }
        if (surroundings_match(sem, ix, iy, instruction)) s += cfg_.w_surroundings;
        if (s != 0.0) any_signal = true;
        score.at(ix, iy) = s;
      }

    ProbabilityMap map;
    map.frame = occ.frame;
    map.prob = Grid2D<double>(w, h, 0.0);
    double total = 0.0;
    if (any_signal) {
      for (int iy = 0; iy < h; ++iy)
        for (int ix = 0; ix < w; ++ix)
          if (occ.cells.at(ix, iy) && val.at(ix, iy)) {
            const double v = std::exp(score.at(ix, iy) / cfg_.temperature);
            map.prob.at(ix, iy) = v;
            total += v;
          }
    }
    if (total <= 0.0) {
      map = uniform_over_free(occ);
    } else {
      for (double& v : map.prob.raw()) v /= total;
    }
    // The centroid of a diffuse multi-modal map is a poor exploration target
    // for the high UAV (it drags toward already-covered ground, or into the
    // interior of large obstacles ringed by mass). Head instead for the most
    // probable cell, breaking ties by the farthest advance along the
    // instruction's direction hint (plain distance from the episode start when
    // no hint is given), so search always pushes the frontier outward.
    PilotDecision d{map, 0.0, 0.0};
    if (!high_history.empty()) {
      const Vec3& cur = high_history.back();
      const double hint = instruction.direction_hint >= 0
                              ? instruction.direction_hint * kPi / 4.0
                              : 0.0;
      const double hx = std::cos(hint), hy = std::sin(hint);
      double best_p = -1.0, best_adv = 0.0;
      Vec3 best{cur.x, cur.y, cfg_.base.z_low};
      for (int iy = 0; iy < h; ++iy)
        for (int ix = 0; ix < w; ++ix) {
          const double p = map.prob.at(ix, iy);
          if (p <= 0.0) continue;
          const double bx = map.frame.center_x(ix) - start_.x;
          const double by = map.frame.center_y(iy) - start_.y;
          const double adv = instruction.direction_hint >= 0 ? bx * hx + by * hy
                                                             : std::hypot(bx, by);
          if (p > best_p + 1e-15 || (p > best_p - 1e-15 && adv > best_adv)) {
            best_p = p;
            best_adv = adv;
            best = {map.frame.center_x(ix), map.frame.center_y(iy), cfg_.base.z_low};
          }
        }
      const double dist = distance_xy(best, cur);
      d.high_heading = std::atan2(best.y - cur.y, best.x - cur.x);
      d.high_step = std::min(cfg_.base.high_step_max, dist);
    }
    return d;
  }

 private:
  bool category_matches(int label, const std::string& category) const {
    auto it = labels_.find(label);
    return it != labels_.end() && it->second == category;
  }

  bool surroundings_match(const Grid2D<int>& sem, int ix, int iy,
                          const Instruction& instruction) const {
    bool want_building = false, want_open = false;
    for (const auto& tag : instruction.surroundings_tags) {
      if (tag == "near building") want_building = true;
      if (tag == "open plaza") want_open = true;
    }
    if (!want_building && !want_open) return false;
    bool near_obstacle = false;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = ix + dx, ny = iy + dy;
        if (!sem.in_bounds(nx, ny)) continue;
        const int l = sem.at(nx, ny);
        if (l >= kLabelObstacleBase && l < kLabelTargetBase) near_obstacle = true;
      }
    return want_building ? near_obstacle : !near_obstacle;
  }

  std::map<int, std::string> labels_;
  Vec3 start_;
  HeuristicPilotConfig cfg_;
};

}  // namespace aeroduo
